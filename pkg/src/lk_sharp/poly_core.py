"""Polynomial and piecewise-polynomial algebra on [-1, 1].

Pieces are stored as :class:`numpy.polynomial.Polynomial` objects whose domain
is the piece itself, i.e. in the monomial basis of ``(x - mid) / half``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import legendre as leg

__all__ = [
    "PiecewisePolynomial",
    "OrthonormalPolyBasis",
    "differentiate",
    "inner_product",
    "gauss_nodes",
    "markov_constant",
    "markov_representer",
    "u0_endpoint",
    "u0_interior",
    "l2_norm",
]


@lru_cache(maxsize=256)
def _leggauss(n: int):
    x, w = leg.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_nodes(a: float, b: float, n: int):
    """Gauss-Legendre nodes and weights on [a, b] with ``n`` points."""
    x, w = _leggauss(int(n))
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * x, half * w


def _piece(coef, a, b) -> Polynomial:
    return Polynomial(np.asarray(coef, dtype=float), domain=[a, b], window=[-1.0, 1.0])


@dataclass(frozen=True, eq=False)
class PiecewisePolynomial:
    """Polynomial pieces on a partition of [-1, 1].

    No continuity is enforced across breakpoints; :meth:`__call__` takes a
    ``side`` argument to select the one-sided value there.
    """

    breakpoints: np.ndarray
    pieces: tuple

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        if bp.ndim != 1 or bp.size < 2:
            raise ValueError("need at least two breakpoints")
        if bp[0] != -1.0 or bp[-1] != 1.0:
            raise ValueError("breakpoints must start at -1 and end at 1")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if len(self.pieces) != bp.size - 1:
            raise ValueError("piece count must equal breakpoint count - 1")
        bp.setflags(write=False)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "pieces", tuple(self.pieces))

    @classmethod
    def from_coefficients(cls, breakpoints, coefs) -> "PiecewisePolynomial":
        """Build from per-piece coefficients in the scaled monomial basis."""
        bp = np.asarray(breakpoints, dtype=float)
        pieces = [_piece(c, bp[i], bp[i + 1]) for i, c in enumerate(coefs)]
        return cls(bp, tuple(pieces))

    @classmethod
    def from_callable_poly(cls, poly: Polynomial) -> "PiecewisePolynomial":
        """Single-piece polynomial re-expressed on [-1, 1]."""
        p = poly.convert(domain=[-1.0, 1.0], window=[-1.0, 1.0])
        return cls(np.array([-1.0, 1.0]), (p,))

    @classmethod
    def constant(cls, value: float) -> "PiecewisePolynomial":
        return cls.from_coefficients([-1.0, 1.0], [[value]])

    @property
    def degree(self) -> int:
        return max(max(len(p.coef) - 1, 0) for p in self.pieces)

    @property
    def n_pieces(self) -> int:
        return len(self.pieces)

    def piece_index(self, x, side: str = "right") -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inner = self.breakpoints[1:-1]
        if side == "right":
            idx = np.searchsorted(inner, x, side="right")
        elif side == "left":
            idx = np.searchsorted(inner, x, side="left")
        else:
            raise ValueError(f"side must be 'left' or 'right', got {side!r}")
        return idx

    def __call__(self, x, side: str = "right"):
        x = np.asarray(x, dtype=float)
        idx = self.piece_index(x, side)
        out = np.empty_like(x)
        for i, p in enumerate(self.pieces):
            mask = idx == i
            if np.any(mask):
                out[mask] = p(x[mask])
        return out if out.ndim else float(out)

    def jump(self, x: float) -> float:
        """Value from the right minus value from the left at ``x``."""
        return float(self(x, "right") - self(x, "left"))

    def derivative(self, s: int = 1) -> "PiecewisePolynomial":
        return differentiate(self, s)

    def scaled(self, factor: float) -> "PiecewisePolynomial":
        return PiecewisePolynomial(self.breakpoints, tuple(factor * p for p in self.pieces))

    def __neg__(self):
        return self.scaled(-1.0)

    def reflected(self) -> "PiecewisePolynomial":
        """The polynomial ``x -> p(-x)``."""
        bp = -self.breakpoints[::-1]
        pieces = []
        for p in reversed(self.pieces):
            a, b = p.domain
            # p(-x) on [-b, -a]: window variable flips sign
            coef = p.coef * (-1.0) ** np.arange(len(p.coef))
            pieces.append(_piece(coef, -b, -a))
        return PiecewisePolynomial(bp, tuple(pieces))

    def max_abs(self, n: int = 2001) -> float:
        xs = np.linspace(-1.0, 1.0, n)
        vals = np.concatenate([np.abs(self(xs, "left")), np.abs(self(xs, "right"))])
        return float(vals.max())


def differentiate(p: PiecewisePolynomial, s: int) -> PiecewisePolynomial:
    """s-th derivative, piece by piece."""
    if s < 0:
        raise ValueError("derivative order must be non-negative")
    if s == 0:
        return p
    pieces = []
    for q in p.pieces:
        d = q.deriv(s) if len(q.coef) > s else _piece([0.0], *q.domain)
        pieces.append(d)
    return PiecewisePolynomial(p.breakpoints, tuple(pieces))


def _merged_breakpoints(*polys: PiecewisePolynomial) -> np.ndarray:
    return np.unique(np.concatenate([q.breakpoints for q in polys]))


def inner_product(p: PiecewisePolynomial, q: PiecewisePolynomial) -> float:
    """Exact L2 inner product over [-1, 1] by per-piece Gauss quadrature."""
    bp = _merged_breakpoints(p, q)
    n = (p.degree + q.degree) // 2 + 1
    total = 0.0
    for a, b in zip(bp[:-1], bp[1:]):
        x, w = gauss_nodes(a, b, n)
        total += float(np.dot(w, p(x) * q(x)))
    return total


def l2_norm(p: PiecewisePolynomial) -> float:
    return float(np.sqrt(max(inner_product(p, p), 0.0)))


@dataclass(frozen=True)
class OrthonormalPolyBasis:
    """Legendre polynomials normalized in L2[-1, 1], degrees ``0..dimension-1``."""

    dimension: int

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")

    @property
    def scale(self) -> np.ndarray:
        n = np.arange(self.dimension)
        return np.sqrt((2 * n + 1) / 2.0)

    def coefficients(self, n: int) -> np.ndarray:
        """Legendre-series coefficients of the n-th basis function."""
        c = np.zeros(self.dimension)
        c[n] = self.scale[n]
        return c

    def derivative_values(self, s: int, t) -> np.ndarray:
        """Matrix ``V[i, n] = p_n^{(s)}(t_i)``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        eye = np.diag(self.scale)
        d = leg.legder(eye, s, axis=0) if s > 0 else eye
        return leg.legval(t, d).T

    def as_polynomial(self, n: int) -> Polynomial:
        return leg.Legendre(self.coefficients(n)).convert(kind=Polynomial)


def _check_rk(r: int, k: int) -> None:
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    if not 0 <= k <= r - 1:
        raise ValueError(f"k must satisfy 0 <= k <= r-1, got k={k}, r={r}")


def markov_constant(r: int, k: int, t: float) -> float:
    """Norm of ``Q -> Q^{(k)}(t)`` on polynomials of degree < r in L2[-1, 1]."""
    _check_rk(r, k)
    if not -1.0 <= t <= 1.0:
        raise ValueError("t must lie in [-1, 1]")
    vals = OrthonormalPolyBasis(r).derivative_values(k, t)[0]
    return float(np.sqrt(np.sum(vals**2)))


def markov_representer(r: int, k: int, t: float) -> Polynomial:
    """The polynomial ``R`` of degree < r with ``(Q, R) = Q^{(k)}(t)``."""
    _check_rk(r, k)
    basis = OrthonormalPolyBasis(r)
    vals = basis.derivative_values(k, t)[0]
    coef = vals * basis.scale
    return leg.Legendre(coef).convert(kind=Polynomial)


def _monomial_derivative_row(x: float, s: int, degree: int, a: float, b: float) -> np.ndarray:
    """Row of d^s/dx^s ((x - mid)/half)^j for j = 0..degree."""
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    z = (x - mid) / half
    row = np.zeros(degree + 1)
    for j in range(s, degree + 1):
        row[j] = factorial(j) / factorial(j - s) * z ** (j - s)
    return row / half**s


def _solve_scaled(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    rs = 1.0 / np.max(np.abs(M), axis=1)
    Ms = M * rs[:, None]
    cs = 1.0 / np.max(np.abs(Ms), axis=0)
    Ms = Ms * cs[None, :]
    y = np.linalg.solve(Ms, rhs * rs)
    # one step of iterative refinement
    y = y + np.linalg.solve(Ms, rhs * rs - Ms @ y)
    return y * cs


def u0_endpoint(r: int, k: int) -> PiecewisePolynomial:
    """Degree 2r-1 polynomial carrying the endpoint data at -1, clamped at +1.

    ``u^{(s)}(-1) = (-1)^(k-1) [s == r-k-1]`` and ``u^{(s)}(1) = 0`` for
    ``s = 0..r-1``.
    """
    _check_rk(r, k)
    deg = 2 * r - 1
    M = np.zeros((2 * r, 2 * r))
    rhs = np.zeros(2 * r)
    for s in range(r):
        M[s] = _monomial_derivative_row(-1.0, s, deg, -1.0, 1.0)
        M[r + s] = _monomial_derivative_row(1.0, s, deg, -1.0, 1.0)
    rhs[r - k - 1] = (-1.0) ** (k - 1)
    coef = _solve_scaled(M, rhs)
    return PiecewisePolynomial.from_coefficients([-1.0, 1.0], [coef])


def _hermite_clamped(r: int, right: np.ndarray) -> Polynomial:
    """Degree 2r-1 polynomial with zero data at -1 and derivative data ``right`` at +1."""
    deg = 2 * r - 1
    M = np.zeros((2 * r, 2 * r))
    for s in range(r):
        M[s] = _monomial_derivative_row(-1.0, s, deg, -1.0, 1.0)
        M[r + s] = _monomial_derivative_row(1.0, s, deg, -1.0, 1.0)
    rhs = np.concatenate([np.zeros(r), right])
    return _piece(_solve_scaled(M, rhs), -1.0, 1.0)


def u0_interior(r: int, k: int, t: float) -> PiecewisePolynomial:
    """Two-piece polynomial clamped at both ends with prescribed jumps at ``t``.

    Jumps: ``u^{(s)}(t+0) - u^{(s)}(t-0) = (-1)^(k-1) [s == r-k-1]`` for
    ``s = 0..2r-1``.

    Built as ``c (x - t)_+^m / m! + q(x)`` with ``m = r-k-1``: the truncated
    power carries the single jump and the global polynomial ``q`` restores the
    clamped data at +1.  This avoids a linear system on the (possibly tiny)
    pieces themselves.
    """
    _check_rk(r, k)
    if not -1.0 < t < 1.0:
        raise ValueError("interior point must satisfy -1 < t < 1; use u0_endpoint for t = +-1")
    m = r - k - 1
    c = (-1.0) ** (k - 1)
    right = np.array([-c * (1.0 - t) ** (m - s) / factorial(m - s) if s <= m else 0.0 for s in range(r)])
    q = _hermite_clamped(r, right)
    jump = Polynomial([-t, 1.0]) ** m * (c / factorial(m))
    left_piece = q.convert(domain=[-1.0, t], window=[-1.0, 1.0])
    right_piece = (q + jump).convert(domain=[t, 1.0], window=[-1.0, 1.0])
    return PiecewisePolynomial(np.array([-1.0, t, 1.0]), (left_piece, right_piece))
