"""Problem-level solvers: trade-off curves, moduli, Stechkin errors and checks.

Everything here is assembled from the direct solver in :mod:`lk_sharp.bvp`
(with the eigen-series of :mod:`lk_sharp.spectral` as a fallback for badly
conditioned solves) and the polynomial pieces of :mod:`lk_sharp.poly_core`.
"""
from __future__ import annotations

import enum
import logging
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .bvp import ConditioningError, ExtremalSolution, ProblemSpec, excess_sq_norm, solve
from .poly_core import (
    PiecewisePolynomial,
    gauss_nodes,
    l2_norm,
    markov_constant,
    u0_endpoint,
    u0_interior,
)
from .spectral import SpectralDecomposition, decompose, eigen_derivative_profile, series_solution

log = logging.getLogger(__name__)

__all__ = [
    "TradeoffPoint",
    "OmegaResult",
    "StechkinStatus",
    "StechkinResult",
    "UniformOmegaResult",
    "UniformStechkinResult",
    "ConjectureReport",
    "DominationReport",
    "Certificate",
    "Theorem10Result",
    "OutOfRangeError",
    "gamma_curve",
    "omega",
    "stechkin",
    "uniform_omega",
    "uniform_stechkin",
    "check_conjecture",
    "norm_domination",
    "theorem10_constants",
    "chebyshev_t_grid",
    "parallel_map",
    "lambda_star_bracket",
]

LAMBDA_LO, LAMBDA_HI = 1e-6, 1e3
LAMBDA_MIN, LAMBDA_MAX = 1e-12, 1e8
SERIES_MODES = 200


class OutOfRangeError(ValueError):
    """Raised when a root-find cannot be bracketed inside the supported lambda range."""


# --------------------------------------------------------------------------- utilities


def _threads() -> int:
    raw = os.environ.get("LK_SHARP_THREADS", "").strip()
    if not raw:
        return 1
    n = int(raw)
    if n < 0:
        raise ValueError("LK_SHARP_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def parallel_map(fn, items, threads: int | None = None) -> list:
    """Map ``fn`` over ``items`` and return results in input order.

    Runs serially unless ``threads`` (or ``LK_SHARP_THREADS``) asks for more;
    ``0`` means one worker per CPU.
    """
    items = list(items)
    n = _threads() if threads is None else (threads or (os.cpu_count() or 1))
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def chebyshev_t_grid(n: int) -> np.ndarray:
    """``n`` Chebyshev-Lobatto points on [-1, 1], exactly symmetric, endpoints exact."""
    if n < 2:
        raise ValueError("t-grid needs at least 2 points")
    # sin form is symmetric in floating point, unlike -cos(pi j/(n-1))
    t = np.sin(np.pi * (2.0 * np.arange(n) - (n - 1)) / (2.0 * (n - 1)))
    t[0], t[-1] = -1.0, 1.0
    if n % 2:
        t[n // 2] = 0.0
    return t


@lru_cache(maxsize=32)
def cached_decomposition(r: int, n_modes: int, galerkin_dim: int | None = None) -> SpectralDecomposition:
    return decompose(r, n_modes, galerkin_dim)


def u0_for(spec: ProblemSpec) -> PiecewisePolynomial:
    """The ``lambda = 0`` solution for ``spec`` (reflected for ``t = +1``)."""
    if spec.t == -1.0:
        return u0_endpoint(spec.r, spec.k)
    if spec.t == 1.0:
        return u0_endpoint(spec.r, spec.k).reflected().scaled((-1.0) ** (spec.r - spec.k))
    return u0_interior(spec.r, spec.k, spec.t)


@dataclass(frozen=True)
class _Norms:
    lam: float
    A: float
    B: float
    sol: ExtremalSolution | None
    source: str
    cond: float


def _norms(spec: ProblemSpec, lam: float) -> _Norms:
    """``(A, B)`` at ``lam``; falls back to the eigen-series when the direct solve is flagged."""
    try:
        sol = solve(spec, lam)
    except ConditioningError as exc:
        sol, cond = None, exc.cond
    else:
        if not sol.flagged:
            return _Norms(lam, sol.A, sol.B, sol, "direct", sol.cond)
        cond = sol.cond
    dec = cached_decomposition(spec.r, SERIES_MODES)
    ser = series_solution(dec, u0_for(spec), lam)
    log.info("spectral fallback for %s lambda=%g (cond %.2e)", spec.point, lam, cond)
    return _Norms(lam, ser.norm_ur, ser.norm_u, sol, "series", cond)


def _log_bracket(g, lo=LAMBDA_LO, hi=LAMBDA_HI):
    """Expand ``[lo, hi]`` by decades until ``g`` (increasing in lambda) changes sign."""
    glo, ghi = g(lo), g(hi)
    while glo > 0 and lo > LAMBDA_MIN:
        lo = max(lo * 1e-2, LAMBDA_MIN)
        glo = g(lo)
    while ghi < 0 and hi < LAMBDA_MAX:
        hi = min(hi * 1e1, LAMBDA_MAX)
        ghi = g(hi)
    return lo, hi, glo, ghi


# --------------------------------------------------------------------------- Gamma curves


@dataclass(frozen=True)
class TradeoffPoint:
    """One point ``(A, B)`` of a trade-off curve, attained at ``lam``."""

    lam: float
    A: float
    B: float
    spec: ProblemSpec
    source: str = "direct"
    A_series: float | None = None
    B_series: float | None = None
    # A^2 - A(0)^2, resolved even when it is below the float spacing of A itself
    A_excess2: float | None = None

    @property
    def delta(self) -> float:
        """``A / (lam B)``: the constraint level at which this point is optimal."""
        return np.inf if self.lam == 0 else self.A / (self.lam * self.B)

    def as_dict(self) -> dict:
        d = {"lambda": float(self.lam), "A": float(self.A), "B": float(self.B), "source": self.source}
        if self.A_excess2 is not None:
            d["A_excess2"] = self.A_excess2
        if self.A_series is not None:
            d.update(A_series=self.A_series, B_series=self.B_series)
        return d


def gamma_curve(spec: ProblemSpec, lambdas, cross_check: bool = False, n_modes: int = 400,
                threads: int | None = None) -> list[TradeoffPoint]:
    """Points of the curve ``lam -> (||u^{(r)}||, ||u||)`` for ascending ``lambdas``.

    ``cross_check`` adds the eigen-series norms (``n_modes`` terms) to each point.
    """
    lams = np.asarray(list(lambdas), dtype=float)
    if lams.size == 0:
        raise ValueError("need at least one lambda")
    if np.any(lams < 0) or np.any(np.diff(lams) < 0):
        raise ValueError("lambdas must be non-negative and sorted ascending")
    def one(lam):
        nm = _norms(spec, lam)
        if nm.source == "direct":
            ex = excess_sq_norm(nm.sol)
        else:
            ex = nm.A**2 - spec.markov**2
        return nm, ex

    rows = parallel_map(one, lams, threads)
    dec = cached_decomposition(spec.r, n_modes) if cross_check else None
    u0 = u0_for(spec) if cross_check else None
    out = []
    for nm, ex in rows:
        As = Bs = None
        if cross_check:
            ser = series_solution(dec, u0, nm.lam)
            As, Bs = ser.norm_ur, ser.norm_u
        out.append(TradeoffPoint(nm.lam, nm.A, nm.B, spec, nm.source, As, Bs, ex))
    return out


# --------------------------------------------------------------------------- Omega


@dataclass(frozen=True, eq=False)
class OmegaResult:
    """``Omega_t(delta) = A delta + B`` at the unique ``lambda(delta)``."""

    spec: ProblemSpec
    delta: float
    lambda_star: float
    omega: float
    A: float
    B: float
    extremal: ExtremalSolution | None = field(default=None, repr=False)
    residual: float = 0.0
    source: str = "direct"
    # best recovery from delta-perturbed data attains the same value
    best_recovery_equal: bool = True

    def extremal_values(self, s: int, x, side: str = "right"):
        """``f^{(s)}(x)`` for the extremal ``f = u^{(r)} / (lambda ||u||)``."""
        if self.extremal is None:
            raise ValueError("no extremal function available for this result")
        scale = self.lambda_star * self.B
        return self.extremal.evaluate(self.spec.r + s, x, side) / scale

    def certificate(self) -> dict:
        """Relative defects of ``||f|| = delta``, ``||f^{(r)}|| = 1``, ``|f^{(k)}(t)| = Omega``."""
        if self.extremal is None:
            raise ValueError("no extremal function available for this result")
        r, k, t = self.spec.r, self.spec.k, self.spec.t
        scale = self.lambda_star * self.B
        nf = self.extremal.norm(r) / scale
        nfr = self.extremal.norm(2 * r) / scale
        fk = abs(self.extremal_values(k, t))
        return {
            "norm_f": abs(nf / self.delta - 1.0),
            "norm_fr": abs(nfr - 1.0),
            "value_fk": abs(fk / self.omega - 1.0),
        }

    def as_dict(self) -> dict:
        return {
            "delta": self.delta,
            "lambda_star": self.lambda_star,
            "omega": self.omega,
            "A": self.A,
            "B": self.B,
            "residual": self.residual,
            "source": self.source,
            "best_recovery_equal": self.best_recovery_equal,
        }


def lambda_star_bracket(spec: ProblemSpec, delta: float):
    """Bracket of ``log lambda`` for ``A / (lambda B) = delta``."""

    def g(lam):
        nm = _norms(spec, lam)
        return np.log(delta) - np.log(nm.A / (lam * nm.B))

    return _log_bracket(g)


def omega(spec: ProblemSpec, delta: float, tol: float = 1e-10) -> OmegaResult:
    """Sharp modulus ``Omega_t(delta)`` and its extremal function.

    Solves ``A(lam) / (lam B(lam)) = delta`` (strictly decreasing in ``lam``)
    by bracketing in ``log lam`` and Brent's method.
    """
    delta = float(delta)
    if not delta >= 0 or not np.isfinite(delta):
        raise ValueError(f"delta must be a finite number >= 0, got {delta}")
    if delta == 0.0:
        return OmegaResult(spec, 0.0, np.inf, 0.0, np.nan, 0.0, None, 0.0, "definition")

    def g(s):
        nm = _norms(spec, np.exp(s))
        return np.log(delta) - np.log(nm.A / (np.exp(s) * nm.B))

    lo, hi, glo, ghi = _log_bracket(lambda lam: g(np.log(lam)))
    if glo > 0 or ghi < 0:
        d_hi = np.exp(np.log(delta) - glo)
        d_lo = np.exp(np.log(delta) - ghi)
        raise OutOfRangeError(
            f"delta={delta:g} outside the reachable range [{d_lo:.3e}, {d_hi:.3e}] "
            f"for lambda in [{LAMBDA_MIN:g}, {LAMBDA_MAX:g}] ({spec.point}, r={spec.r}, k={spec.k})"
        )
    s = brentq(g, np.log(lo), np.log(hi), xtol=min(tol, 1e-12), rtol=4 * np.finfo(float).eps, maxiter=200)
    lam = float(np.exp(s))
    nm = _norms(spec, lam)
    resid = abs(delta * lam * nm.B - nm.A) / nm.A
    if resid > tol:
        log.warning("omega residual %.2e above tolerance %.1e", resid, tol)
    return OmegaResult(spec, delta, lam, nm.A * delta + nm.B, nm.A, nm.B, nm.sol, resid, nm.source)


# --------------------------------------------------------------------------- Stechkin


class StechkinStatus(str, enum.Enum):
    FINITE = "finite"
    INFINITE = "infinite"


@dataclass(frozen=True, eq=False)
class StechkinResult:
    """Best approximation error ``E_N``; infinite when ``N`` is below the Markov constant."""

    spec: ProblemSpec
    N: float
    status: StechkinStatus
    lambda_N: float | None
    E_N: float
    A: float | None = None
    kernel: ExtremalSolution | None = field(default=None, repr=False)
    markov: float = 0.0

    @property
    def is_infinite(self) -> bool:
        return self.status is StechkinStatus.INFINITE

    def kernel_values(self, x):
        """Samples of ``u^{(r)}_{lambda_N}``, the representer of the optimal functional."""
        if self.kernel is None:
            raise ValueError("no kernel for an infinite result")
        return self.kernel.evaluate(self.spec.r, x)

    def as_dict(self) -> dict:
        return {
            "N": self.N,
            "status": self.status.value,
            "lambda_N": self.lambda_N,
            "E_N": "infinite" if self.is_infinite else self.E_N,
            "A": self.A,
            "markov": self.markov,
        }


def stechkin(spec: ProblemSpec, N: float, tol: float = 1e-10) -> StechkinResult:
    """``E_N`` for the functional ``f -> f^{(k)}(t)``: ``B(lam_N)`` with ``A(lam_N) = N``."""
    N = float(N)
    if not np.isfinite(N):
        raise ValueError("N must be finite")
    M = spec.markov
    if N < M * (1.0 - 1e-13):
        return StechkinResult(spec, N, StechkinStatus.INFINITE, None, np.inf, None, None, M)
    if N <= M * (1.0 + 1e-13):
        nm = _norms(spec, 0.0)
        return StechkinResult(spec, N, StechkinStatus.FINITE, 0.0, nm.B, nm.A, nm.sol, M)

    def g(lam):
        return _norms(spec, lam).A - N

    lo, hi, glo, ghi = _log_bracket(g)
    if ghi < 0:
        raise OutOfRangeError(
            f"N={N:g} exceeds A(lambda={LAMBDA_MAX:g})={ghi + N:.6g} ({spec.point}, r={spec.r}, k={spec.k})"
        )
    if glo > 0:
        # N barely above M: the root lies in (0, lo), where A is smooth in lambda itself
        lam = brentq(g, 0.0, lo, xtol=1e-300, rtol=1e-13, maxiter=200)
    else:
        s = brentq(lambda s: g(np.exp(s)), np.log(lo), np.log(hi), xtol=min(tol, 1e-12), maxiter=200)
        lam = float(np.exp(s))
    nm = _norms(spec, lam)
    return StechkinResult(spec, N, StechkinStatus.FINITE, lam, nm.B, nm.A, nm.sol, M)


# --------------------------------------------------------------------------- uniform case


@dataclass(frozen=True, eq=False)
class UniformOmegaResult:
    r: int
    k: int
    delta: float
    omega: float
    argmax_t: float
    t_grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    endpoint_omega: float = 0.0

    @property
    def at_endpoint(self) -> bool:
        return abs(self.argmax_t) == 1.0

    @property
    def max_interior_excess(self) -> float:
        """``max_t Omega_t - Omega_{-1}`` over interior grid points (<= 0 expected)."""
        inner = self.values[1:-1]
        return float(inner.max() - self.endpoint_omega) if inner.size else -np.inf


def _check_uniform_rk(r: int, k: int) -> None:
    if r not in (1, 2):
        raise ValueError("the uniform case is only established for r in {1, 2}")
    if not 0 <= k <= r - 1:
        raise ValueError(f"k must satisfy 0 <= k <= r-1, got k={k}, r={r}")


def uniform_omega(r: int, k: int, delta: float, t_grid_size: int = 41, tol: float = 1e-10,
                  threads: int | None = None) -> UniformOmegaResult:
    """``sup_t Omega_t(delta)`` over a Chebyshev t-grid including both endpoints."""
    _check_uniform_rk(r, k)
    ts = chebyshev_t_grid(t_grid_size)
    vals = np.array(parallel_map(lambda t: omega(ProblemSpec(r, k, t), delta, tol).omega, ts, threads))
    end = max(vals[0], vals[-1])
    i = int(np.argmax(vals))
    # grid points next to an endpoint approach the endpoint value, so ties go to the endpoint
    if vals[i] <= end * (1.0 + 1e-12):
        i = 0 if vals[0] >= vals[-1] else len(ts) - 1
    res = UniformOmegaResult(r, k, float(delta), float(vals[i]), float(ts[i]), ts, vals, float(end))
    if not res.at_endpoint:
        warnings.warn(f"uniform modulus maximum found at interior t={ts[i]:g}", RuntimeWarning, stacklevel=2)
    return res


@dataclass(frozen=True, eq=False)
class UniformStechkinResult:
    endpoint: StechkinResult
    sup_interior: float
    sup_markov: float
    sup_markov_t: float
    t_grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    notes: tuple = ()

    @property
    def E_N(self) -> float:
        return self.endpoint.E_N

    @property
    def is_infinite(self) -> bool:
        return self.endpoint.is_infinite


def uniform_stechkin(r: int, k: int, N: float, t_grid_size: int = 41, tol: float = 1e-10,
                     threads: int | None = None) -> UniformStechkinResult:
    """``E_N`` for ``f -> f^{(k)}`` in the sup norm, via the endpoint problem.

    The threshold is the measured ``sup_t M_t`` on the grid; the interior
    errors ``E_{N,t}`` are returned for the diagnostic ``sup_t E_{N,t} = E_N``.
    """
    _check_uniform_rk(r, k)
    ts = chebyshev_t_grid(t_grid_size)
    mk = np.array([markov_constant(r, k, t) for t in ts])
    j = int(np.argmax(mk))
    notes = ("the uniform Stechkin result is stated for r = 1 and for r = 2 (k in {0, 1}); "
             "the original hypothesis repeats r = 1 in its second clause",)
    if N < mk[j] * (1.0 - 1e-13):
        inf = StechkinResult(ProblemSpec(r, k, -1.0), float(N), StechkinStatus.INFINITE, None, np.inf, None, None, mk[j])
        return UniformStechkinResult(inf, np.inf, float(mk[j]), float(ts[j]), ts, np.full(ts.size, np.inf), notes)
    end = stechkin(ProblemSpec(r, k, -1.0), N, tol)
    vals = np.array(parallel_map(lambda t: stechkin(ProblemSpec(r, k, t), N, tol).E_N, ts, threads))
    return UniformStechkinResult(end, float(vals.max()), float(mk[j]), float(ts[j]), ts, vals, notes)


# --------------------------------------------------------------------------- conjecture


@dataclass(frozen=True)
class ConjectureReport:
    """Endpoint value vs interior maximum of ``|phi_n^{(r+k)}|``."""

    r: int
    k: int
    n: int
    eigenvalue: float
    endpoint_value: float
    interior_max: float
    argmax: float
    margin: float
    tol: float
    samples: int

    @property
    def verdict(self) -> str:
        return "holds" if self.margin >= -self.tol else "fails"

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "eigenvalue": self.eigenvalue,
            "endpoint_value": self.endpoint_value,
            "interior_max": self.interior_max,
            "argmax": self.argmax,
            "margin": self.margin,
            "tol": self.tol,
            "verdict": self.verdict,
        }


def _polish_max(fn, a: float, b: float) -> tuple[float, float]:
    res = minimize_scalar(lambda x: -abs(fn(x)), bounds=(a, b), method="bounded",
                          options={"xatol": 1e-13, "maxiter": 200})
    return float(res.x), float(-res.fun)


def check_conjecture(r: int, k: int, n_modes: int, samples: int = 2001,
                     galerkin_dim: int | None = None) -> list[ConjectureReport]:
    """Compare ``|phi_n^{(r+k)}(-1)|`` with interior maxima for the first ``n_modes`` modes.

    Interior local maxima of the sampled profile are refined by a bounded
    golden-section search.  The verdict tolerance covers the quadratic
    undershoot of a grid maximum, ``h^2/8 * max|phi^{(r+k+2)}|``.
    """
    if not 0 <= k <= r - 1:
        raise ValueError(f"k must satisfy 0 <= k <= r-1, got k={k}, r={r}")
    if samples < 5:
        raise ValueError("need at least 5 samples")
    dec = cached_decomposition(r, n_modes, galerkin_dim)
    s = r + k
    h = 2.0 / (samples - 1)
    reports = []
    for n in range(1, dec.n_modes + 1):
        x, v = eigen_derivative_profile(dec, n, s, samples)
        av = np.abs(v)
        end = float(av[0])
        fn = lambda z, n=n: float(dec.mode_values(n, s, z))
        best, arg = float(av[1:-1].max()), float(x[1 + np.argmax(av[1:-1])])
        peaks = np.nonzero((av[1:-1] >= av[:-2]) & (av[1:-1] >= av[2:]))[0] + 1
        for i in peaks:
            xm, vm = _polish_max(fn, x[i - 1], x[i + 1])
            if vm > best and -1.0 < xm < 1.0:
                best, arg = vm, xm
        curv = float(np.max(np.abs(dec.mode_values(n, s + 2, x))))
        tol = max(1e-9 * end, h * h / 8.0 * curv)
        reports.append(ConjectureReport(r, k, n, float(dec.eigenvalues[n - 1]), end, best, arg,
                                        end - best, tol, samples))
    return reports


@dataclass(frozen=True, eq=False)
class DominationReport:
    """Worst-case ``||u_{lam,t}^{(r)}|| - ||u_lam^{(r)}||`` and ``||u_{lam,t}|| - ||u_lam||``."""

    r: int
    k: int
    lambdas: np.ndarray = field(repr=False)
    ts: np.ndarray = field(repr=False)
    excess_A: float
    excess_B: float

    @property
    def holds(self) -> bool:
        return self.excess_A <= 1e-9 and self.excess_B <= 1e-9


def norm_domination(r: int, k: int, lambdas, ts, threads: int | None = None) -> DominationReport:
    """Check that interior-point norms never exceed the endpoint ones on a grid.

    Excesses are relative to the endpoint norms.
    """
    lambdas = np.asarray(list(lambdas), dtype=float)
    ts = np.asarray(list(ts), dtype=float)
    end = {lam: _norms(ProblemSpec(r, k, -1.0), lam) for lam in lambdas}

    def one(pair):
        lam, t = pair
        nm = _norms(ProblemSpec(r, k, t), lam)
        e = end[lam]
        return nm.A / e.A - 1.0, nm.B / e.B - 1.0

    res = parallel_map(one, [(lam, t) for lam in lambdas for t in ts], threads)
    arr = np.array(res) if res else np.zeros((1, 2)) - np.inf
    return DominationReport(r, k, lambdas, ts, float(arr[:, 0].max()), float(arr[:, 1].max()))


# --------------------------------------------------------------------------- polynomial inequality


@dataclass(frozen=True)
class Certificate:
    """Grid check of one pointwise inequality: ``margin = min(lhs - rhs)``."""

    name: str
    margin: float
    grid: str
    threshold: float = -1e-10

    @property
    def passed(self) -> bool:
        return self.margin >= self.threshold

    def as_dict(self) -> dict:
        return {"name": self.name, "margin": self.margin, "grid": self.grid, "passed": self.passed}


@dataclass(frozen=True, eq=False)
class Theorem10Result:
    r: int
    k: int
    A: float
    B: float
    certificates: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.certificates)


def _gamma_weight(m: int) -> float:
    """``int_{-1}^{1} (1 - x^2)^m dx``."""
    x, w = gauss_nodes(-1.0, 1.0, m + 1)
    return float(np.dot(w, (1.0 - x * x) ** m))


def _closed_form_p(r: int):
    """``1 - (1/g) int_{-1}^x (1 - s^2)^{r-1} ds`` as a numpy polynomial."""
    from numpy.polynomial import Polynomial

    base = Polynomial([1.0, 0.0, -1.0]) ** (r - 1)
    g = _gamma_weight(r - 1)
    return 1.0 - base.integ(lbnd=-1.0) / g


def theorem10_constants(r: int, k: int, grid: int = 500) -> Theorem10Result:
    """Sharp constants ``(||u0^{(r)}||, ||u0||)`` of the additive sup-norm inequality.

    Valid for ``k in {r-2, r-1}``.  The returned certificates re-check the
    pointwise polynomial inequalities behind the result on ``grid``-point
    grids in ``x`` and ``t`` (by symmetry ``t`` runs over ``(-1, 0]``).
    """
    if r < 2:
        raise ValueError("r must be >= 2")
    if k not in (r - 2, r - 1):
        raise ValueError(f"k must be r-2 or r-1, got k={k}, r={r}")
    u0 = u0_endpoint(r, k)
    A, B = l2_norm(u0.derivative(r)), l2_norm(u0)
    xg = np.linspace(-1.0, 1.0, grid)
    tg = np.linspace(-1.0, 0.0, grid + 1)[1:]
    desc = f"{grid} x-points on [-1,1], {grid} t-points on (-1,0]"
    certs = []
    if k == r - 1:
        sign = (-1.0) ** r
        p_m1 = u0.scaled(sign)
        closed = _closed_form_p(r)
        certs.append(Certificate("p_-1 matches closed form", -float(np.max(np.abs(p_m1(xg) - closed(xg)))), desc))
        worst_ineq, worst_id = np.inf, 0.0
        for t in tg:
            p_t = u0_interior(r, k, t).scaled(sign)
            left = xg[xg < t]
            # |p_t| <= p_-1 on [-1, t)
            if left.size:
                worst_ineq = min(worst_ineq, float(np.min(p_m1(left) - np.abs(p_t(left)))))
            chi = (xg < t).astype(float)
            worst_id = max(worst_id, float(np.max(np.abs(p_t(xg) - (p_m1(xg) - chi)))))
        certs.append(Certificate("|p_t| <= p_-1 on [-1,t)", worst_ineq, desc))
        certs.append(Certificate("p_t = p_-1 - indicator[-1,t)", -worst_id, desc))
    else:
        sign = (-1.0) ** (r - 1)
        p_m1 = u0.scaled(sign)
        p_1 = p_m1.reflected()
        worst_ineq, worst_id = np.inf, 0.0
        for t in tg:
            p_t = u0_interior(r, k, t).scaled(sign)
            d_t = np.where(xg <= t, -(1.0 - t) * (1.0 + xg), -(1.0 + t) * (1.0 - xg))
            for side in ("left", "right"):
                pt = p_t(xg, side)
                worst_ineq = min(worst_ineq, float(np.min(4.0 * pt - d_t)))
                rep = 0.5 * ((1.0 - t) * p_m1(xg) + (1.0 + t) * p_1(xg) + d_t)
                mask = xg != t
                worst_id = max(worst_id, float(np.max(np.abs(pt - rep)[mask], initial=0.0)))
        certs.append(Certificate("4 p_t >= delta_t", worst_ineq, desc))
        certs.append(Certificate("p_t = ((1-t)p_-1 + (1+t)p_1 + delta_t)/2", -worst_id, desc))
        tt = np.linspace(-1.0, 1.0, grid)
        g = 2.0 * p_m1(tt) + 2.0 * p_1(tt) - (1.0 - tt * tt)
        certs.append(Certificate("2p_-1(t) + 2p_1(t) >= 1 - t^2", float(np.min(g)), f"{grid} t-points on [-1,1]"))
        if r == 2:
            certs.append(Certificate("equality for r = 2", -float(np.max(np.abs(g))), f"{grid} t-points on [-1,1]"))
    # the conclusion itself: interior norms never exceed the endpoint norm
    worst = max(l2_norm(u0_interior(r, k, t)) for t in tg[:: max(1, grid // 50)])
    certs.append(Certificate("||u_0,t|| <= ||u_0||", (B - worst) / B, f"{len(tg[:: max(1, grid // 50)])} t-points on (-1,0]"))
    return Theorem10Result(r, k, A, B, tuple(certs))
