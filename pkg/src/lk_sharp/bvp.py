"""Direct solver for the constant-coefficient boundary value problems.

For ``lam > 0`` the solution on each piece is a combination of
``exp(mu_j (x - anchor_j))`` with ``mu_j^(2r) = (-1)^(r+1) lam``.  Anchors are
chosen so every basis function is bounded by one on its piece.  When
``lam^(1/2r) * length`` is small those exponentials are nearly dependent, so
short pieces switch to the fundamental (Taylor) system of the same ODE.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import factorial

import numpy as np
import scipy.linalg

from .poly_core import (
    PiecewisePolynomial,
    _check_rk,
    gauss_nodes,
    markov_constant,
    u0_endpoint,
    u0_interior,
)

log = logging.getLogger(__name__)

__all__ = [
    "ProblemSpec",
    "CharacteristicBasis",
    "ExtremalSolution",
    "ConditioningError",
    "solve",
    "solve_endpoint",
    "solve_interior",
    "solution_norm",
    "excess_sq_norm",
    "evaluate",
    "LAMBDA_MAX",
    "COND_FLAG",
]

LAMBDA_MAX = 1e8
COND_FLAG = 1e12
COND_FAIL = 1e15
# pieces with lam^(1/2r) * length below this use the Taylor fundamental system
TAYLOR_SWITCH = 3.0
# exponential pieces with lam^(1/2r) * length above this integrate in closed form
GRAM_SWITCH = 64.0


class ConditioningError(ArithmeticError):
    """Raised when a boundary system is too ill-conditioned to trust."""

    def __init__(self, message: str, cond: float):
        super().__init__(f"{message} (condition estimate {cond:.3e})")
        self.cond = cond


@dataclass(frozen=True)
class ProblemSpec:
    """Indices ``(r, k)`` and the evaluation point ``t`` of the functional.

    ``t = -1`` or ``t = 1`` selects the endpoint problem, anything strictly
    inside selects the interior problem with jump conditions.
    """

    r: int
    k: int
    t: float = -1.0

    def __post_init__(self):
        _check_rk(self.r, self.k)
        t = float(self.t)
        if not -1.0 <= t <= 1.0:
            raise ValueError(f"t must lie in [-1, 1], got {t}")
        object.__setattr__(self, "t", t)

    @property
    def is_endpoint(self) -> bool:
        return abs(self.t) == 1.0

    @property
    def point(self) -> str:
        if self.t == -1.0:
            return "endpoint(-1)"
        if self.t == 1.0:
            return "endpoint(+1)"
        return f"interior({self.t!r})"

    @property
    def markov(self) -> float:
        return markov_constant(self.r, self.k, self.t)

    def as_dict(self) -> dict:
        return {"r": self.r, "k": self.k, "t": self.t}


def _unit_roots(r: int, sign: int) -> np.ndarray:
    """Solutions of ``w^(2r) = sign`` ordered by angle."""
    n = 2 * r
    if sign > 0:
        ang = np.pi * np.arange(n) / r
    else:
        ang = np.pi * (2 * np.arange(n) + 1) / n
    w = np.exp(1j * ang)
    # snap values that should be exactly real or imaginary
    w.real[np.abs(w.real) < 1e-15] = 0.0
    w.imag[np.abs(w.imag) < 1e-15] = 0.0
    return w


@dataclass(frozen=True)
class CharacteristicBasis:
    """Roots of ``mu^(2r) = sign * lam`` for the exponential solution basis.

    ``sign = (-1)^(r+1)`` gives the boundary value problem, ``sign = (-1)^r``
    the eigenvalue problem of the clamped operator.
    """

    r: int
    lam: float
    sign: int
    roots: np.ndarray = field(repr=False)

    @classmethod
    def for_bvp(cls, r: int, lam: float) -> "CharacteristicBasis":
        return cls._make(r, lam, (-1) ** (r + 1))

    @classmethod
    def for_eigen(cls, r: int, lam: float) -> "CharacteristicBasis":
        return cls._make(r, lam, (-1) ** r)

    @classmethod
    def _make(cls, r, lam, sign):
        if lam <= 0:
            raise ValueError("characteristic basis needs lam > 0")
        rho = lam ** (1.0 / (2 * r))
        return cls(r, float(lam), int(sign), rho * _unit_roots(r, sign))

    @property
    def rho(self) -> float:
        return self.lam ** (1.0 / (2 * self.r))

    def anchors(self, a: float, b: float) -> np.ndarray:
        """Decay-directed anchors: growing modes at ``b``, decaying at ``a``."""
        re = self.roots.real
        tol = 1e-12 * self.rho
        return np.where(re > tol, b, np.where(re < -tol, a, 0.5 * (a + b)))

    def residuals(self) -> np.ndarray:
        return np.abs(self.roots ** (2 * self.r) - self.sign * self.lam)


def _phi1(w: np.ndarray) -> np.ndarray:
    """(exp(w) - 1) / w by Taylor series, for |w| <= 0.5."""
    out = np.zeros_like(w)
    term = np.ones_like(w)
    for n in range(1, 28):
        out = out + term
        term = term * w / (n + 1)
    return out


class _ExpPiece:
    """Exponential-sum representation on [a, b]."""

    kind = "exp"

    def __init__(self, a, b, basis: CharacteristicBasis):
        self.a, self.b = float(a), float(b)
        self.mu = basis.roots
        self.anchor = basis.anchors(a, b)
        self.coef = None

    def rows(self, s: int, x: float) -> np.ndarray:
        return self.mu**s * np.exp(self.mu * (x - self.anchor))

    def values(self, s: int, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        E = np.exp(np.multiply.outer(x, self.mu) - self.mu * self.anchor)
        return (E @ (self.coef * self.mu**s)).real

    def sq_norm(self, s: int) -> float:
        L = self.b - self.a
        rho_L = np.abs(self.mu[0]) * L
        if rho_L <= GRAM_SWITCH:
            # the Gram form squares the conditioning of a nearly dependent basis
            panels = int(np.ceil(rho_L / 4.0))
            edges = np.linspace(self.a, self.b, panels + 1)
            total = 0.0
            for lo, hi in zip(edges[:-1], edges[1:]):
                x, w = gauss_nodes(lo, hi, 32)
                v = self.values(s, x)
                total += float(np.dot(w, v * v))
            return total
        d = self.coef * self.mu**s
        Ea = np.exp(self.mu * (self.a - self.anchor))
        Eb = np.exp(self.mu * (self.b - self.anchor))
        Pa = np.outer(Ea, Ea.conj())
        Pb = np.outer(Eb, Eb.conj())
        z = np.add.outer(self.mu, self.mu.conj())
        w = z * L
        small = np.abs(w) <= 0.5
        I = np.empty_like(Pa)
        I[small] = Pa[small] * L * _phi1(w[small])
        big = ~small
        I[big] = (Pb[big] - Pa[big]) / z[big]
        return float(np.real(d @ I @ d.conj()))


class _TaylorPiece:
    """Fundamental system ``y_m^{(s)}(c) = [s == m]`` about the piece midpoint."""

    kind = "taylor"

    def __init__(self, a, b, r: int, kappa: float):
        self.a, self.b = float(a), float(b)
        self.r = r
        self.kappa = float(kappa)
        self.c = 0.5 * (a + b)
        h = 0.5 * (b - a)
        rho_h = abs(kappa) ** (1.0 / (2 * r)) * h
        n = 2 * r
        J = 1
        while J < 80:
            p = n * J
            if (rho_h ** p) / factorial(p) < 1e-22:
                break
            J += 1
        self.J = J
        self.coef = None

    def _y(self, m: int, z: np.ndarray) -> np.ndarray:
        n = 2 * self.r
        out = np.zeros_like(z, dtype=float)
        for j in range(self.J + 1):
            p = m + n * j
            out = out + self.kappa**j * z**p / factorial(p)
        return out

    def _deriv_index(self, m: int, s: int):
        n = 2 * self.r
        if s <= m:
            return m - s, 1.0
        wraps = -((m - s) // n)
        return m - s + n * wraps, self.kappa**wraps

    def _basis_values(self, s: int, x) -> np.ndarray:
        z = np.atleast_1d(np.asarray(x, dtype=float)) - self.c
        cols = []
        for m in range(2 * self.r):
            idx, fac = self._deriv_index(m, s)
            cols.append(fac * self._y(idx, z))
        return np.stack(cols, axis=-1)

    def rows(self, s: int, x: float) -> np.ndarray:
        return self._basis_values(s, x)[0].astype(complex)

    def values(self, s: int, x) -> np.ndarray:
        return self._basis_values(s, x) @ self.coef

    def sq_norm(self, s: int) -> float:
        deg = 2 * self.r * (self.J + 1)
        x, w = gauss_nodes(self.a, self.b, deg + 1)
        v = self.values(s, x)
        return float(np.dot(w, v * v))


class _PolyPiece:
    kind = "poly"

    def __init__(self, poly):
        self.poly = poly
        self.a, self.b = (float(v) for v in poly.domain)

    def values(self, s: int, x) -> np.ndarray:
        p = self.poly.deriv(s) if s else self.poly
        return p(np.asarray(x, dtype=float))

    def sq_norm(self, s: int) -> float:
        p = self.poly.deriv(s) if s else self.poly
        n = max(len(p.coef), 1)
        x, w = gauss_nodes(self.a, self.b, n)
        v = p(x)
        return float(np.dot(w, v * v))


@dataclass(frozen=True, eq=False)
class ExtremalSolution:
    """Solution ``u`` of the endpoint or interior problem for one ``lam``.

    The solution for ``t = +1`` is stored as the ``t = -1`` solution with
    ``reflected = True`` and evaluated as ``(-1)^(r-k) u(-x)``.
    """

    spec: ProblemSpec
    lam: float
    breakpoints: np.ndarray
    pieces: tuple = field(repr=False)
    cond: float = 1.0
    reflected: bool = False
    poly: PiecewisePolynomial | None = field(default=None, repr=False)
    norm_u: float = field(init=False)
    norm_ur: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "norm_u", self.norm(0))
        object.__setattr__(self, "norm_ur", self.norm(self.spec.r))

    @property
    def flagged(self) -> bool:
        return self.cond > COND_FLAG

    @property
    def A(self) -> float:
        return self.norm_ur

    @property
    def B(self) -> float:
        return self.norm_u

    def norm(self, s: int = 0) -> float:
        return float(np.sqrt(max(sum(p.sq_norm(s) for p in self.pieces), 0.0)))

    def _raw(self, s: int, x: np.ndarray, side: str) -> np.ndarray:
        inner = self.breakpoints[1:-1]
        idx = np.searchsorted(inner, x, side="right" if side == "right" else "left")
        out = np.empty_like(x)
        for i, p in enumerate(self.pieces):
            m = idx == i
            if np.any(m):
                out[m] = p.values(s, x[m])
        return out

    def evaluate(self, s: int, x, side: str = "right"):
        """s-th derivative at ``x`` with one-sided semantics at breakpoints."""
        if side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        xa = np.asarray(x, dtype=float)
        flat = np.atleast_1d(xa)
        if np.any(np.abs(flat) > 1.0 + 1e-14):
            raise ValueError("x must lie in [-1, 1]")
        if self.reflected:
            other = "left" if side == "right" else "right"
            vals = self._raw(s, -flat, other)
            vals = vals * (-1.0) ** (self.spec.r - self.spec.k + s)
        else:
            vals = self._raw(s, flat, side)
        return vals.reshape(xa.shape) if xa.ndim else float(vals[0])

    __call__ = evaluate


def _make_piece(a: float, b: float, r: int, lam: float):
    rho = lam ** (1.0 / (2 * r))
    if rho * (b - a) < TAYLOR_SWITCH:
        return _TaylorPiece(a, b, r, (-1) ** (r + 1) * lam)
    return _ExpPiece(a, b, CharacteristicBasis.for_bvp(r, lam))


def _solve_system(M: np.ndarray, rhs: np.ndarray):
    """Equilibrated QR with column pivoting plus one refinement step."""
    rs = 1.0 / np.max(np.abs(M), axis=1)
    Ms = M * rs[:, None]
    cs = 1.0 / np.max(np.abs(Ms), axis=0)
    Ms = Ms * cs[None, :]
    b = rhs * rs
    Q, R, P = scipy.linalg.qr(Ms, pivoting=True)

    def _apply(v):
        y = scipy.linalg.solve_triangular(R, Q.conj().T @ v)
        x = np.empty_like(y)
        x[P] = y
        return x

    x = _apply(b)
    x = x + _apply(b - Ms @ x)
    d = np.abs(np.diag(R))
    cond = float(d.max() / d.min()) if d.min() > 0 else np.inf
    return x * cs, cond


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not lam >= 0.0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    if lam > LAMBDA_MAX:
        log.warning("lambda=%g exceeds the supported range %g", lam, LAMBDA_MAX)
    return lam


def _finish(spec, lam, pieces, bp, cond, reflected=False, poly=None) -> ExtremalSolution:
    if cond > COND_FAIL:
        raise ConditioningError(f"boundary system for {spec.point}, lambda={lam:g}", cond)
    sol = ExtremalSolution(spec, lam, np.asarray(bp, dtype=float), tuple(pieces), cond, reflected, poly)
    if sol.flagged:
        log.warning("ill-conditioned solve for %s lambda=%g (cond %.2e)", spec.point, lam, cond)
    return sol


def solve_endpoint(spec: ProblemSpec, lam: float) -> ExtremalSolution:
    """Solve ``(-1)^r u^{(2r)} + lam u = 0`` with the endpoint data at -1.

    ``spec.t = +1`` is served by reflecting the ``t = -1`` solution.
    """
    if not spec.is_endpoint:
        raise ValueError("solve_endpoint needs t = -1 or t = +1")
    lam = _check_lambda(lam)
    r, k = spec.r, spec.k
    reflected = spec.t == 1.0
    if lam == 0.0:
        u0 = u0_endpoint(r, k)
        poly = u0.reflected().scaled((-1.0) ** (r - k)) if reflected else u0
        return _finish(spec, 0.0, [_PolyPiece(u0.pieces[0])], [-1.0, 1.0], 1.0, reflected, poly)
    piece = _make_piece(-1.0, 1.0, r, lam)
    n = 2 * r
    M = np.zeros((n, n), dtype=complex)
    rhs = np.zeros(n, dtype=complex)
    for s in range(r):
        M[s] = piece.rows(s, -1.0)
        M[r + s] = piece.rows(s, 1.0)
    rhs[r - k - 1] = (-1.0) ** (k - 1)
    coef, cond = _solve_system(M, rhs)
    piece.coef = coef if piece.kind == "exp" else coef.real
    return _finish(spec, lam, [piece], [-1.0, 1.0], cond, reflected)


def solve_interior(spec: ProblemSpec, lam: float) -> ExtremalSolution:
    """Solve the clamped problem with the 2r jump conditions at ``spec.t``."""
    if spec.is_endpoint:
        raise ValueError("solve_interior needs -1 < t < 1; t = +-1 is the endpoint problem")
    lam = _check_lambda(lam)
    r, k, t = spec.r, spec.k, spec.t
    if lam == 0.0:
        u0 = u0_interior(r, k, t)
        pieces = [_PolyPiece(p) for p in u0.pieces]
        return _finish(spec, 0.0, pieces, [-1.0, t, 1.0], 1.0, False, u0)
    left = _make_piece(-1.0, t, r, lam)
    right = _make_piece(t, 1.0, r, lam)
    n = 2 * r
    M = np.zeros((2 * n, 2 * n), dtype=complex)
    rhs = np.zeros(2 * n, dtype=complex)
    row = 0
    for s in range(r):
        M[row, :n] = left.rows(s, -1.0)
        M[row + 1, n:] = right.rows(s, 1.0)
        row += 2
    for s in range(n):
        M[row, :n] = -left.rows(s, t)
        M[row, n:] = right.rows(s, t)
        if s == r - k - 1:
            rhs[row] = (-1.0) ** (k - 1)
        row += 1
    coef, cond = _solve_system(M, rhs)
    for piece, c in ((left, coef[:n]), (right, coef[n:])):
        piece.coef = c if piece.kind == "exp" else c.real
    return _finish(spec, lam, [left, right], [-1.0, t, 1.0], cond)


def solve(spec: ProblemSpec, lam: float) -> ExtremalSolution:
    """Dispatch to the endpoint or interior solver."""
    return solve_endpoint(spec, lam) if spec.is_endpoint else solve_interior(spec, lam)


def solution_norm(sol: ExtremalSolution, s: int) -> float:
    """``||u^{(s)}||_2`` over [-1, 1] (piecewise, jumps ignored)."""
    if s < 0:
        raise ValueError("derivative order must be non-negative")
    if s == 0:
        return sol.norm_u
    if s == sol.spec.r:
        return sol.norm_ur
    return sol.norm(s)


def _u0_for(spec: ProblemSpec) -> PiecewisePolynomial:
    if spec.t == -1.0:
        return u0_endpoint(spec.r, spec.k)
    if spec.t == 1.0:
        return u0_endpoint(spec.r, spec.k).reflected().scaled((-1.0) ** (spec.r - spec.k))
    return u0_interior(spec.r, spec.k, spec.t)


def excess_sq_norm(sol: ExtremalSolution, s: int | None = None) -> float:
    """``||(u_lam - u_0)^{(s)}||^2`` by composite Gauss quadrature (default ``s = r``).

    For ``s = r`` this equals ``||u_lam^{(r)}||^2 - ||u_0^{(r)}||^2`` (the
    difference is clamped and orthogonal to polynomials of degree < r), but it
    keeps full relative accuracy when ``lam`` is tiny and the difference of the
    two norms is below the float resolution of either one.
    """
    r = sol.spec.r
    s = r if s is None else s
    if sol.lam == 0.0:
        return 0.0
    d0 = _u0_for(sol.spec).derivative(s)
    rho = sol.lam ** (1.0 / (2 * r))
    bp = np.unique([-1.0, sol.spec.t, 1.0])
    total = 0.0
    for a, b in zip(bp[:-1], bp[1:]):
        panels = int(np.ceil(rho * (b - a) / 4.0)) + 1
        edges = np.linspace(a, b, panels + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            x, w = gauss_nodes(lo, hi, 32)
            v = sol.evaluate(s, x) - d0(x)
            total += float(np.dot(w, v * v))
    return total


def evaluate(sol: ExtremalSolution, s: int, x, side: str = "right"):
    return sol.evaluate(s, x, side)
