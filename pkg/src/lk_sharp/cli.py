"""Command-line front end.

Every subcommand writes a list of records, as JSON (floats as 17-digit
decimal strings) or CSV (17 significant digits, '\\n' line endings).
Output depends only on the arguments, so repeated runs are byte-identical.

Exit codes: 0 ok, 2 bad arguments, 3 numerical failure, 4 selftest failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import platform
import sys

import numpy as np
import scipy

from . import __version__
from .bvp import ConditioningError, ProblemSpec
from .poly_core import markov_constant
from .problems import (
    OutOfRangeError,
    cached_decomposition,
    check_conjecture,
    gamma_curve,
    omega,
    parallel_map,
    stechkin,
    uniform_omega,
    uniform_stechkin,
)
from .spectral import determinant_eigenvalues, eigen_derivative_profile

EXIT_OK, EXIT_ARGS, EXIT_NUMERIC, EXIT_SELFTEST = 0, 2, 3, 4

DEFAULT_LAMBDAS = np.concatenate([[0.0], np.logspace(-3, 6, 40)])


class UsageError(ValueError):
    pass


# --------------------------------------------------------------------------- formatting


def fmt_float(x) -> str:
    return format(float(x), ".17g")


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)) or v is None or isinstance(v, str):
        return bool(v) if isinstance(v, np.bool_) else v
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    if isinstance(v, dict):
        return {key: _jsonable(val) for key, val in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    return str(v)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    if isinstance(v, (list, tuple)):
        return ";".join(_cell(x) for x in v)
    return str(v)


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    cols: list[str] = []
    for row in rows:
        cols += [c for c in row if c not in cols]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in cols])
    return buf.getvalue()


def to_json(meta: dict, rows: list[dict]) -> str:
    return json.dumps({"meta": _jsonable(meta), "records": _jsonable(rows)}, indent=2) + "\n"


def _versions() -> dict:
    return {"lk_sharp": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _write_columns(path: str, columns: dict) -> None:
    """Figure data: one column per curve, one row per sample."""
    names = list(columns)
    data = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for row in data:
        w.writerow([fmt_float(v) for v in row])
    _write(buf.getvalue(), path)


# --------------------------------------------------------------------------- grids


def _parse_grid(text: str, name: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"--{name} expects a:b:n, got {text!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"--{name}: {exc}") from None
    if n < 1:
        raise UsageError(f"--{name}: n must be >= 1")
    return a, b, n


def _linear(text: str, name: str) -> np.ndarray:
    a, b, n = _parse_grid(text, name)
    return np.linspace(a, b, n)


def _geometric(text: str, name: str) -> np.ndarray:
    a, b, n = _parse_grid(text, name)
    if a <= 0 or b <= 0:
        raise UsageError(f"--{name}: geometric grid needs positive end points")
    return np.geomspace(a, b, n)


def _float_list(text: str, name: str) -> np.ndarray:
    items = [s for s in text.replace(" ", "").split(",") if s]
    try:
        return np.array([float(s) for s in items])
    except ValueError as exc:
        raise UsageError(f"--{name}: {exc}") from None


def _t_values(args) -> np.ndarray:
    if args.t_grid is not None:
        ts = _linear(args.t_grid, "t-grid")
    else:
        ts = np.array([args.t])
    if np.any(np.abs(ts) > 1) or not np.all(np.isfinite(ts)):
        raise UsageError("t values must lie in [-1, 1]")
    return ts


def _delta_values(args) -> np.ndarray:
    if args.delta_grid is not None:
        ds = _geometric(args.delta_grid, "delta-grid")
    elif args.delta is not None:
        ds = np.array([args.delta])
    else:
        raise UsageError("one of --delta or --delta-grid is required")
    if np.any(ds < 0) or not np.all(np.isfinite(ds)):
        raise UsageError("delta must be finite and >= 0")
    return ds


def _N_values(args) -> np.ndarray:
    if args.N_grid is not None:
        ns = _linear(args.N_grid, "N-grid")
    elif args.N is not None:
        ns = np.array([args.N])
    else:
        raise UsageError("one of --N or --N-grid is required")
    if not np.all(np.isfinite(ns)) or np.any(ns < 0):
        raise UsageError("N must be finite and >= 0")
    return ns


def _specs(args) -> list[ProblemSpec]:
    return [ProblemSpec(args.r, args.k, float(t)) for t in _t_values(args)]


def _meta(args, **extra) -> dict:
    meta = {"command": args.command, "r": args.r, "k": getattr(args, "k", None)}
    if hasattr(args, "t"):
        meta["t"] = args.t if getattr(args, "t_grid", None) is None else args.t_grid
    meta["tolerances"] = {"tol": args.tol}
    meta.update(extra)
    meta["versions"] = _versions()
    return meta


# --------------------------------------------------------------------------- commands


def cmd_omega(args):
    if args.uniform:
        ds = _delta_values(args)
        rows = []
        for d in ds:
            res = uniform_omega(args.r, args.k, float(d), args.t_grid_size, args.tol)
            rows.append({"r": args.r, "k": args.k, "delta": res.delta, "omega": res.omega,
                         "argmax_t": res.argmax_t, "at_endpoint": res.at_endpoint,
                         "endpoint_omega": res.endpoint_omega,
                         "max_interior_excess": res.max_interior_excess})
        return _meta(args, t_grid_size=args.t_grid_size), rows

    specs, ds = _specs(args), _delta_values(args)
    jobs = [(s, float(d)) for s in specs for d in ds]

    def one(job):
        spec, d = job
        res = omega(spec, d, args.tol)
        row = {**spec.as_dict(), "problem": spec.point, **res.as_dict()}
        if res.extremal is not None:
            cert = res.certificate()
            row.update({f"defect_{name}": v for name, v in cert.items()})
        return row

    return _meta(args), parallel_map(one, jobs)


def cmd_gamma(args):
    if args.lambda_grid is not None:
        lams = _geometric(args.lambda_grid, "lambda-grid")
    elif args.lambdas is not None:
        lams = _float_list(args.lambdas, "lambdas")
    else:
        lams = DEFAULT_LAMBDAS
    if lams.size == 0:
        raise UsageError("empty lambda list")
    if np.any(lams < 0) or not np.all(np.isfinite(lams)):
        raise UsageError("lambda values must be finite and >= 0")
    if np.any(np.diff(lams) <= 0):
        raise UsageError("lambda values must be strictly increasing")
    rows = []
    for spec in _specs(args):
        pts = gamma_curve(spec, lams, cross_check=args.cross_check, n_modes=args.modes)
        for p in pts:
            row = {**spec.as_dict(), **p.as_dict(), "delta": p.delta}
            if args.cross_check:
                row["A_series"], row["B_series"] = p.A_series, p.B_series
            rows.append(row)
    return _meta(args, n_modes=args.modes if args.cross_check else None), rows


def cmd_stechkin(args):
    ns = _N_values(args)
    rows, kernels = [], {}
    x = np.linspace(-1.0, 1.0, args.samples)
    if args.uniform:
        notes = ()
        for N in ns:
            res = uniform_stechkin(args.r, args.k, float(N), args.t_grid_size, args.tol)
            notes = res.notes
            rows.append({"r": args.r, "k": args.k, "uniform": True, **res.endpoint.as_dict(),
                         "sup_interior": res.sup_interior, "sup_markov": res.sup_markov,
                         "sup_markov_t": res.sup_markov_t})
            if not res.is_infinite:
                kernels[f"kernel_N={fmt_float(N)}"] = res.endpoint.kernel_values(x)
        meta = _meta(args, t_grid_size=args.t_grid_size, notes=list(notes))
    else:
        for spec in _specs(args):
            for N in ns:
                res = stechkin(spec, float(N), args.tol)
                rows.append({**spec.as_dict(), "problem": spec.point, **res.as_dict()})
                if not res.is_infinite:
                    kernels[f"kernel_t={fmt_float(spec.t)}_N={fmt_float(N)}"] = res.kernel_values(x)
        meta = _meta(args)
    if args.export_figure:
        _write_columns(args.export_figure, {"x": x, **kernels})
    return meta, rows


def cmd_markov(args):
    rows = [{**s.as_dict(), "markov": markov_constant(s.r, s.k, s.t)} for s in _specs(args)]
    return _meta(args), rows


def cmd_eigen(args):
    dec = cached_decomposition(args.r, args.modes, args.galerkin_dim)
    lam = dec.eigenvalues
    det = determinant_eigenvalues(args.r, lam.size) if args.cross_check else None
    rows = []
    for n in range(lam.size):
        row = {"r": args.r, "n": n + 1, "eigenvalue": lam[n]}
        if det is not None:
            row["determinant_eigenvalue"] = det[n]
            row["rel_diff"] = abs(lam[n] / det[n] - 1.0)
        rows.append(row)
    return _meta(args, galerkin_dim=dec.galerkin_dim), rows


def cmd_conjecture(args):
    reps = check_conjecture(args.r, args.k, args.modes, args.samples, args.galerkin_dim)
    rows = [{"r": args.r, "k": args.k, **rep.as_dict()} for rep in reps]
    if args.export_figure:
        dec = cached_decomposition(args.r, args.modes, args.galerkin_dim)
        cols = {}
        for rep in reps:
            x, v = eigen_derivative_profile(dec, rep.n, args.r + args.k, args.samples)
            cols.setdefault("x", x)
            cols[f"phi_{rep.n}_d{args.r + args.k}"] = v
        _write_columns(args.export_figure, cols)
    dim = cached_decomposition(args.r, args.modes, args.galerkin_dim).galerkin_dim
    meta = _meta(args, samples=args.samples, n_modes=args.modes, galerkin_dim=dim)
    return meta, rows


def cmd_selftest(args):
    from .acceptance import CHECKS, format_table, run_checks

    ids = None
    if args.only:
        try:
            ids = [int(s) for s in args.only.split(",") if s]
        except ValueError:
            raise UsageError("--only expects comma-separated criterion numbers") from None
        unknown = sorted(set(ids) - set(CHECKS))
        if unknown:
            raise UsageError(f"unknown criterion numbers {unknown}; valid: 1..{max(CHECKS)}")
    results = run_checks(ids)
    text = format_table(results)
    _write(text if text.endswith("\n") else text + "\n", args.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_SELFTEST


COMMANDS = {
    "omega": cmd_omega,
    "gamma": cmd_gamma,
    "stechkin": cmd_stechkin,
    "markov": cmd_markov,
    "eigen": cmd_eigen,
    "conjecture": cmd_conjecture,
    "selftest": cmd_selftest,
}


# --------------------------------------------------------------------------- parser


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    p = argparse.ArgumentParser(
        prog="lk-sharp",
        description="Sharp Landau-Kolmogorov constants on [-1, 1] (L2 norms of f and f^(r)).",
        epilog="t = -1 or t = 1 selects the endpoint problem; any other t in (-1, 1) the interior one. "
               "LK_SHARP_THREADS sets the number of worker threads for grid sweeps (0 = auto).",
    )
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--r", type=int, required=True, help="order of the derivative constraint")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--tol", type=float, default=1e-10, help="root-finding tolerance")

    with_k = argparse.ArgumentParser(add_help=False)
    with_k.add_argument("--k", type=int, required=True, help="order of the evaluated derivative, 0 <= k < r")

    with_t = argparse.ArgumentParser(add_help=False)
    with_t.add_argument("--t", type=float, default=-1.0, help="evaluation point in [-1, 1]")
    with_t.add_argument("--t-grid", default=None, metavar="A:B:N", help="linear grid of t values")

    uniform = argparse.ArgumentParser(add_help=False)
    uniform.add_argument("--uniform", action="store_true", help="sup norm of f^(k) (r in {1, 2})")
    uniform.add_argument("--t-grid-size", type=_positive_int, default=41,
                         help="Chebyshev t points for the uniform case")

    q = sub.add_parser("omega", parents=[common, with_k, with_t, uniform], formatter_class=fmt,
                       help="sharp modulus Omega_t(delta)")
    q.add_argument("--delta", type=float, default=None)
    q.add_argument("--delta-grid", default=None, metavar="A:B:N", help="geometric grid of delta values")

    q = sub.add_parser("gamma", parents=[common, with_k, with_t], formatter_class=fmt,
                       help="points (lambda, A, B) of the trade-off curve")
    q.add_argument("--lambdas", default=None, help="comma-separated increasing lambda values "
                   "(default: 0 and 40 log-spaced values in [1e-3, 1e6])")
    q.add_argument("--lambda-grid", default=None, metavar="A:B:N", help="geometric grid of lambda values")
    q.add_argument("--cross-check", action="store_true", help="add eigen-series norms")
    q.add_argument("--modes", type=_positive_int, default=400, help="series modes for --cross-check")

    q = sub.add_parser("stechkin", parents=[common, with_k, with_t, uniform], formatter_class=fmt,
                       help="best approximation of the k-th derivative functional")
    q.add_argument("--N", type=float, default=None)
    q.add_argument("--N-grid", default=None, metavar="A:B:N", help="linear grid of N values")
    q.add_argument("--export-figure", default=None, metavar="PATH", help="CSV samples of the optimal kernel")
    q.add_argument("--samples", type=_positive_int, default=401, help="kernel samples on [-1, 1]")

    sub.add_parser("markov", parents=[common, with_k, with_t], formatter_class=fmt,
                   help="Markov constant M_t for polynomials of degree < r")

    q = sub.add_parser("eigen", parents=[common], formatter_class=fmt,
                       help="eigenvalues of the clamped operator (-1)^r D^(2r)")
    q.add_argument("--modes", type=_positive_int, default=20)
    q.add_argument("--galerkin-dim", type=_positive_int, default=None, help="default 2 * modes + 40")
    q.add_argument("--cross-check", action="store_true", help="compare with determinant roots")

    q = sub.add_parser("conjecture", parents=[common, with_k], formatter_class=fmt,
                       help="endpoint vs interior maxima of |phi_n^(r+k)|")
    q.add_argument("--modes", type=_positive_int, default=10)
    q.add_argument("--galerkin-dim", type=_positive_int, default=None, help="default 2 * modes + 40")
    q.add_argument("--samples", type=_positive_int, default=2001)
    q.add_argument("--export-figure", default=None, metavar="PATH", help="CSV samples of phi_n^(r+k)")

    q = sub.add_parser("selftest", formatter_class=fmt, help="run the acceptance checks")
    q.add_argument("--only", default=None, help="comma-separated criterion numbers")
    q.add_argument("--out", default=None)
    return p


GRID_FLAGS = ("--t-grid", "--delta-grid", "--N-grid", "--lambda-grid", "--t")


def _join_negative_values(argv: list[str]) -> list[str]:
    """``--t-grid -1:1:5`` -> ``--t-grid=-1:1:5`` so argparse does not read a flag."""
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in GRID_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") and not argv[i + 1].startswith("--"):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_join_negative_values(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        out = COMMANDS[args.command](args)
        if isinstance(out, int):
            return out
        meta, rows = out
        text = to_json(meta, rows) if args.format == "json" else to_csv(rows)
        _write(text, args.out)
        return EXIT_OK
    except (ConditioningError, OutOfRangeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"lk-sharp: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"lk-sharp: error: {exc}", file=sys.stderr)
        return EXIT_ARGS


if __name__ == "__main__":
    sys.exit(main())
