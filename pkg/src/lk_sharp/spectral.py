"""Eigen-expansion of the clamped operator ``A u = (-1)^r u^{(2r)}``.

The Galerkin space is spanned by r-fold integrals (from -1) of normalized
Legendre polynomials of degree >= r.  These are exactly the polynomials
``(1 - x^2)^r q(x)`` and their r-th derivatives are orthonormal, so the
stiffness matrix is the identity and the eigenproblem reduces to the Gram
matrix ``G`` of the basis itself: ``G c = gamma c`` with ``lambda = 1/gamma``.
``G = B^T B`` for an explicit factor ``B``; the eigenpairs are taken from the
SVD of ``B``, which resolves small ``gamma`` far better than ``eigh(G)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import factorial

import numpy as np
import scipy.linalg
from numpy.polynomial import legendre as leg
from scipy.optimize import brentq

from .bvp import CharacteristicBasis
from .poly_core import PiecewisePolynomial, _check_rk, gauss_nodes, l2_norm

log = logging.getLogger(__name__)

__all__ = [
    "SpectralDecomposition",
    "SeriesSolution",
    "GreensKernel",
    "decompose",
    "eigen_determinant",
    "determinant_eigenvalues",
    "series_solution",
    "kernel_value",
    "apply_inverse",
    "eigen_derivative_profile",
]

# keep the lower part of the computed spectrum, the rest is under-resolved
KEEP_FRACTION = 0.5
# extra Galerkin functions so that the highest kept modes of small problems are resolved
EXTRA_DIM = 40
# eigenvalue magnitudes of A^{-1} below this (relative) are treated as noise
GAMMA_FLOOR = 1e-28


def _chop(c: np.ndarray, tol: float = 1e-15) -> np.ndarray:
    """Drop a trailing plateau of round-off sized Legendre coefficients."""
    scale = np.max(np.abs(c))
    if scale == 0.0:
        return c[:1] * 0.0
    big = np.nonzero(np.abs(c) > tol * scale)[0]
    return c[: big[-1] + 1]


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenpairs ``(lambda_n, phi_n)``, ascending, ``||phi_n|| = 1``.

    ``coef_r[:, n]`` holds the Legendre coefficients of ``phi_{n+1}^{(r)}``;
    every other derivative is obtained by exact integration or differentiation
    of that series.
    """

    r: int
    galerkin_dim: int
    eigenvalues: np.ndarray
    coef_r: np.ndarray = field(repr=False)

    @property
    def n_modes(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def gammas(self) -> np.ndarray:
        return 1.0 / self.eigenvalues

    def coefficients(self, s: int, modes=None) -> np.ndarray:
        """Legendre coefficients of ``phi_n^{(s)}`` (one column per mode)."""
        C = self.coef_r if modes is None else self.coef_r[:, modes]
        if s < 0 or s > 2 * self.r:
            raise ValueError(f"derivative order must lie in 0..{2 * self.r}")
        if s < self.r:
            return leg.legint(C, m=self.r - s, lbnd=-1.0, axis=0)
        if s > self.r:
            return leg.legder(C, m=s - self.r, axis=0)
        return C

    def values(self, s: int, x, modes=None) -> np.ndarray:
        """``phi_n^{(s)}(x)`` with shape ``(len(x), n_modes)``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        C = self.coefficients(s, modes)
        return leg.legvander(x, C.shape[0] - 1) @ C

    def mode_values(self, n: int, s: int, x) -> np.ndarray:
        """``phi_n^{(s)}`` for a single 1-based mode index, with round-off chopped."""
        if not 1 <= n <= self.n_modes:
            raise ValueError(f"mode index must lie in 1..{self.n_modes}")
        c = _chop(self.coef_r[:, n - 1])
        if s < self.r:
            c = leg.legint(c, m=self.r - s, lbnd=-1.0)
        elif s > self.r:
            c = leg.legder(c, m=s - self.r)
        return leg.legval(np.asarray(x, dtype=float), c)

    def fourier(self, f: PiecewisePolynomial) -> np.ndarray:
        """Coefficients ``(f, phi_n)`` by per-piece Gauss quadrature."""
        n = (f.degree + self.coef_r.shape[0] + 2 * self.r) // 2 + 2
        out = np.zeros(self.n_modes)
        for a, b in zip(f.breakpoints[:-1], f.breakpoints[1:]):
            x, w = gauss_nodes(a, b, n)
            out += (w * f(x)) @ self.values(0, x)
        return out

    def inner(self, s: int = 0) -> np.ndarray:
        """Matrix of ``(phi_m^{(s)}, phi_n^{(s)})``."""
        C = self.coefficients(s)
        w = 2.0 / (2.0 * np.arange(C.shape[0]) + 1.0)
        return C.T @ (w[:, None] * C)


def _basis_factor(r: int, dim: int) -> np.ndarray:
    """Legendre coefficients of the basis, scaled so ``G = B^T B``."""
    m = np.arange(r, r + dim)
    E = np.zeros((r + dim, dim))
    E[m, np.arange(dim)] = np.sqrt((2.0 * m + 1.0) / 2.0)
    Psi = leg.legint(E, m=r, lbnd=-1.0, axis=0)
    w = np.sqrt(2.0 / (2.0 * np.arange(Psi.shape[0]) + 1.0))
    return w[:, None] * Psi


def _sign_fix(r: int, C: np.ndarray) -> np.ndarray:
    """Make the first non-negligible derivative of order >= r at -1 positive."""
    out = C.copy()
    for j in range(C.shape[1]):
        c = _chop(C[:, j])
        for s in range(r, 2 * r + 1):
            d = leg.legder(c, m=s - r) if s > r else c
            v = float(leg.legval(-1.0, d))
            scale = float(np.sum(np.abs(d))) or 1.0
            if abs(v) > 1e-8 * scale:
                if v < 0:
                    out[:, j] = -out[:, j]
                break
    return out


def decompose(r: int, n_modes: int, galerkin_dim: int | None = None) -> SpectralDecomposition:
    """Lowest ``n_modes`` eigenpairs of the clamped operator of order 2r.

    ``galerkin_dim`` defaults to ``2 * n_modes + 40``; the upper part of the
    Galerkin spectrum is discarded as under-resolved.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    if galerkin_dim is None:
        galerkin_dim = int(np.ceil(n_modes / KEEP_FRACTION)) + EXTRA_DIM
    if galerkin_dim < 2 * n_modes:
        raise ValueError("galerkin_dim must be at least 2 * n_modes")
    B = _basis_factor(r, galerkin_dim)
    _, sig, Vt = scipy.linalg.svd(B, full_matrices=False, lapack_driver="gesvd")
    gam = sig**2
    if gam[-1] <= 0.0:
        raise ArithmeticError("Gram matrix of the clamped basis is not positive definite")
    resolved = int(np.sum(gam > GAMMA_FLOOR * galerkin_dim * gam[0]))
    if resolved < n_modes:
        log.warning("only %d of %d requested modes are resolved for r=%d", resolved, n_modes, r)
        n_modes = resolved
    gam = gam[:n_modes]
    V = Vt[:n_modes].T
    # phi^{(r)} = sum_i c_i Phat_{i+r} with c = v / sqrt(gamma)
    scale = np.sqrt((2.0 * np.arange(r, r + galerkin_dim) + 1.0) / 2.0)
    C = np.zeros((r + galerkin_dim, n_modes))
    C[r:] = scale[:, None] * V / np.sqrt(gam)[None, :]
    C = _sign_fix(r, C)
    lam = 1.0 / gam
    lam.setflags(write=False)
    C.setflags(write=False)
    return SpectralDecomposition(r, galerkin_dim, lam, C)


def eigen_determinant(r: int, lam: float) -> float:
    """Real, scaled determinant of the homogeneous clamped system.

    Zero exactly when ``lam`` is an eigenvalue.  Columns use anchored
    exponentials so all entries stay bounded, rows are divided by ``rho^s``.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    basis = CharacteristicBasis.for_eigen(r, lam)
    mu = basis.roots
    anchor = basis.anchors(-1.0, 1.0)
    rho = basis.rho
    M = np.empty((2 * r, 2 * r), dtype=complex)
    for s in range(r):
        M[s] = (mu / rho) ** s * np.exp(mu * (-1.0 - anchor))
        M[r + s] = (mu / rho) ** s * np.exp(mu * (1.0 - anchor))
    det = np.linalg.det(M)
    # columns come in conjugate pairs, each swap contributes a factor -1
    pairs = int(np.sum(mu.imag > 1e-12 * rho))
    return float(np.real(det * 1j**pairs))


def determinant_eigenvalues(r: int, count: int, step: float = 0.05) -> np.ndarray:
    """First ``count`` eigenvalues from sign changes of :func:`eigen_determinant`.

    The scan runs in ``rho = lam^(1/2r)``, where eigenvalues are spaced by
    roughly ``pi / 2``.  Reliable for ``r <= 8``.
    """
    _check_rk(r, 0)

    def g(rho):
        return eigen_determinant(r, rho ** (2 * r))

    roots = []
    # tiny rho gives an exponentially small, sign-noisy determinant; rho = r/2
    # still lies below the first eigenvalue for every r up to 8
    lo = max(step, 0.5 * r)
    glo = g(lo)
    while len(roots) < count:
        hi = lo + step
        ghi = g(hi)
        if glo == 0.0:
            roots.append(lo)
        elif glo * ghi < 0:
            roots.append(brentq(g, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200))
        lo, glo = hi, ghi
    return np.asarray(roots[:count]) ** (2 * r)


@dataclass(frozen=True, eq=False)
class SeriesSolution:
    """Truncated eigen-series ``u = u0 - sum lam/(lam + lam_n) (u0, phi_n) phi_n``."""

    dec: SpectralDecomposition
    u0: PiecewisePolynomial
    lam: float
    weights: np.ndarray = field(repr=False)
    norm_u: float
    norm_ur: float
    tail_u: float
    tail_ur: float

    def __call__(self, x, s: int = 0, side: str = "right"):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        base = self.u0.derivative(s)(x, side)
        return base + self.dec.values(s, x) @ self.weights


def _tail(terms: np.ndarray, window: int = 10) -> float:
    """Geometric extrapolation of the remainder from the last ``window`` terms.

    Terms at round-off level and exact zeros (parity) are skipped; the decay
    ratio is measured per index so alternating zero patterns do not bias it.
    Returns ``inf`` when the observed terms are not decaying.
    """
    t = np.abs(np.asarray(terms, dtype=float))
    if t.size == 0 or t.max() == 0.0:
        return 0.0
    idx = np.nonzero(t > 1e-13 * t.max())[0][-window:]
    if idx.size < 4:
        return 0.0
    half = idx.size // 2
    ia, ib = idx[:half], idx[half:]
    a, b = np.log(t[ia]).mean(), np.log(t[ib]).mean()
    slope = (b - a) / (ib.mean() - ia.mean())
    if slope >= 0.0:
        return float("inf")
    step = max(float(np.diff(idx).mean()), 1.0)
    Q = float(np.exp(slope * step))
    return float(t[idx[-1]] * Q / (1.0 - Q))


def series_solution(dec: SpectralDecomposition, u0: PiecewisePolynomial, lam: float) -> SeriesSolution:
    """Series form of the solution for ``lam >= 0`` given the ``lam = 0`` solution ``u0``.

    Norms use ``x = lam * gamma_n`` so that every term is bounded:
    ``||u||^2 = ||u0||^2 - sum c_n^2 x (2 + x) / (1 + x)^2`` and
    ``||u^{(r)}||^2 = ||u0^{(r)}||^2 + sum c_n^2 lam x / (1 + x)^2``.
    The extrapolated tail of each sum is added when it is finite and is
    reported separately in ``tail_u`` / ``tail_ur``.
    """
    lam = float(lam)
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    r = dec.r
    B0 = l2_norm(u0)
    A0 = l2_norm(u0.derivative(r))
    c = dec.fourier(u0)
    x = lam * dec.gammas
    du = c**2 * x * (2.0 + x) / (1.0 + x) ** 2
    dr = c**2 * lam * x / (1.0 + x) ** 2
    tu, tr = _tail(du), _tail(dr)
    nu = np.sqrt(max(B0**2 - du.sum() - (tu if np.isfinite(tu) else 0.0), 0.0))
    nr = np.sqrt(A0**2 + dr.sum() + (tr if np.isfinite(tr) else 0.0))
    weights = -x / (1.0 + x) * c
    return SeriesSolution(dec, u0, lam, weights, float(nu), float(nr), tu, tr)


@dataclass(frozen=True, eq=False)
class GreensKernel:
    """Kernel of ``A^{-1}``: ``(A^{-1} u)(x) = (-1)^r int K(x, xi) u(xi) dxi``.

    ``K(x, xi) = (x - xi)_+^{2r-1}/(2r-1)! - w(xi) . F(x)`` where
    ``w_s(xi) = (1 - xi)^{2r-1-s}/(2r-1-s)!`` and ``F(x) = M^{-T} e(x)``,
    ``e_j(x) = (x + 1)^{r+j}/(r+j)!``, ``M_{sj} = 2^{r+j-s}/(r+j-s)!``.
    """

    r: int
    Minv_T: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, r: int) -> "GreensKernel":
        if r < 1:
            raise ValueError("r must be >= 1")
        M = np.array([[2.0 ** (r + j - s) / factorial(r + j - s) for j in range(r)] for s in range(r)])
        lu, piv = scipy.linalg.lu_factor(M)
        inv = scipy.linalg.lu_solve((lu, piv), np.eye(r))
        if not np.all(np.isfinite(inv)):
            raise ArithmeticError("singular kernel system")
        return cls(r, inv.T)

    def F(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        r = self.r
        e = np.stack([(x + 1.0) ** (r + j) / factorial(r + j) for j in range(r)], axis=-1)
        return e @ self.Minv_T.T

    def w(self, xi) -> np.ndarray:
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        r = self.r
        return np.stack([(1.0 - xi) ** (2 * r - 1 - s) / factorial(2 * r - 1 - s) for s in range(r)], axis=-1)

    def __call__(self, x, xi) -> np.ndarray:
        x, xi = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(xi, dtype=float))
        n = 2 * self.r - 1
        tp = np.where(x > xi, (x - xi), 0.0) ** n / factorial(n)
        corr = np.sum(self.w(xi.ravel()) * self.F(x.ravel()), axis=-1).reshape(x.shape)
        return tp - corr


def kernel_value(ker: GreensKernel, x: float, xi: float) -> float:
    if abs(x) > 1.0 or abs(xi) > 1.0:
        raise ValueError("x and xi must lie in [-1, 1]")
    return float(ker(x, xi))


def apply_inverse(ker: GreensKernel, f, x, n_quad: int = 64) -> np.ndarray:
    """``(A^{-1} f)(x)`` by Gauss quadrature split at ``xi = x``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    for i, xv in enumerate(x):
        total = 0.0
        for a, b in ((-1.0, xv), (xv, 1.0)):
            if b <= a:
                continue
            q, w = gauss_nodes(a, b, n_quad)
            total += float(np.dot(w, ker(np.full_like(q, xv), q) * f(q)))
        out[i] = total
    return (-1.0) ** ker.r * out


def eigen_derivative_profile(dec: SpectralDecomposition, n: int, s: int, samples: int = 2001):
    """Samples ``(x, phi_n^{(s)}(x))`` on a uniform grid of [-1, 1]."""
    if not 0 <= s <= 2 * dec.r - 1:
        raise ValueError(f"s must lie in 0..{2 * dec.r - 1}")
    x = np.linspace(-1.0, 1.0, samples)
    return x, dec.mode_values(n, s, x)
