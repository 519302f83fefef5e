"""Command-line front end.

Every command writes a canonical JSON report (sorted keys, no timestamps)
into the output directory, atomically.  Exit codes: 0 success, 1 a verdict
failed (``verify``) or the null was rejected (``gof``), 2 usage or parameter
error, 3 numerical failure (a partial report is still written).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .characterization import (
    GridFunction,
    Lemma5Params,
    fixed_point_solve,
    functional_eq_residual,
    ode_residual,
)
from .distributions import FAMILIES, Distribution
from .errors import (
    ConfigurationError,
    DomainError,
    IdentityNotFound,
    NonConvergenceError,
    ParameterError,
    QuadratureError,
    StructureError,
)
from .expressions import expr_sample
from .gof import GofConfig, calibration_run, gof_test, read_data
from .identities import (
    GridSpec,
    MCSettings,
    VerificationReport,
    catalog,
    get_identity,
    verify_identity,
)
from .quadrature import QuadSettings

OUTPUT_ENV = "LOGIPARETO_OUTPUT_DIR"
DEFAULT_OUTPUT = "reports"

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _out_dir(args) -> Path:
    return Path(args.out or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT)


def _write_report(args, name: str, payload: dict) -> Path:
    path = _out_dir(args) / f"{name}.json"
    atomic_write(path, canonical_json(payload))
    return path


def parse_law(text: str) -> Distribution:
    """``Family`` or ``Family:p1=v1,p2=v2``, e.g. ``ParetoII:lam=2,power=1``."""
    name, _, rest = text.partition(":")
    if name not in FAMILIES:
        raise UsageError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise UsageError(f"bad parameter {item!r} in {text!r}; expected name=value")
        try:
            params[key.strip()] = float(val)
        except ValueError:
            raise UsageError(f"bad value in {item!r}") from None
    try:
        return FAMILIES[name](**params)
    except TypeError as exc:
        raise UsageError(f"{text!r}: {exc}") from None


def _require_seed(args) -> int:
    if args.seed is None:
        raise UsageError(f"{args.command} is stochastic and needs --seed")
    if args.seed < 0:
        raise UsageError("--seed must be non-negative")
    return args.seed


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_catalog(args) -> int:
    records = [r.to_json() for r in catalog()]
    for r in records:
        print(f"{r['id']:<6} {r['formula']:<50} {r['constraint']:<22} {r['paper_tag']}")
    _write_report(args, "catalog", {"command": "catalog", "identities": records})
    return EXIT_OK


def _instances(args):
    if args.identity == "all":
        records = sorted(catalog(), key=lambda r: r.id)
    else:
        records = [get_identity(args.identity)]
    explicit = args.k is not None or args.n is not None
    out = []
    for rec in records:
        if explicit:
            if args.k is None or args.n is None:
                raise UsageError("give both --k and --n (and --m where needed)")
            out.append((rec, rec.check((args.k, args.m, args.n))))
        else:
            out.extend((rec, p) for p in rec.instances(args.n_max))
    return out


def _grid(args) -> GridSpec:
    if args.grid_lower is not None or args.grid_upper is not None:
        if args.grid_lower is None or args.grid_upper is None:
            raise UsageError("give both --grid-lower and --grid-upper")
        return GridSpec(args.grid_lower, args.grid_upper, args.grid_points, "uniform")
    return GridSpec.quantile(args.grid_points, args.grid_eps)


def cmd_verify(args) -> int:
    mc = None
    if args.mc_size is not None:
        mc = MCSettings(args.mc_size, _require_seed(args))
    base = None if args.base == "matching" else parse_law(args.base)
    grid = _grid(args)
    if not (args.quad_tol > 0 and args.quad_panels >= 1):
        raise UsageError("--quad-tol must be positive and --quad-panels at least 1")
    quad = QuadSettings(abs_tol=args.quad_tol, max_panels=args.quad_panels)
    reports: list[VerificationReport] = []
    config = {
        "identity": args.identity,
        "k": args.k,
        "m": args.m,
        "n": args.n,
        "n_max": args.n_max,
        "base": args.base,
        "grid": grid.to_json(),
        "tol": args.tol,
        "mc_size": args.mc_size,
        "seed": args.seed,
        "quad": {"abs_tol": quad.abs_tol, "max_panels": quad.max_panels},
    }
    status = EXIT_OK
    try:
        for rec, params in _instances(args):
            reports.append(verify_identity(rec, params, base, grid, args.tol, mc, quad))
    except QuadratureError as exc:
        partial = getattr(exc, "report", None)
        if partial is not None:
            reports.append(partial)
        print(f"numerical failure: {exc}", file=sys.stderr)
        status = EXIT_NUMERIC
    except StructureError as exc:
        raise UsageError(str(exc)) from None
    passed = sum(r.passed for r in reports)
    payload = {
        "command": "verify",
        "config": config,
        "reports": [r.to_json() for r in reports],
        "summary": {"total": len(reports), "passed": passed, "failed": len(reports) - passed},
    }
    _write_report(args, "verify", payload)
    lines = [",".join(VerificationReport.CSV_HEADER)] + [",".join(r.csv_row()) for r in reports]
    csv_text = "\n".join(lines) + "\n"
    atomic_write(_out_dir(args) / "verify.csv", csv_text)
    sys.stdout.write(csv_text)
    if status == EXIT_OK and passed < len(reports):
        status = EXIT_FAIL
    return status


def cmd_sample(args) -> int:
    seed = _require_seed(args)
    rec = get_identity(args.identity)
    params = rec.check((args.k, args.m, args.n))
    base = None if args.base == "matching" else parse_law(args.base)
    lhs, rhs = rec.build(params, base)
    expr = lhs if args.side == "lhs" else rhs
    values = expr_sample(expr, np.random.default_rng(seed), args.count)
    atomic_write(_out_dir(args) / "sample.txt", "".join(f"{v!r}\n" for v in values.tolist()))
    qs = [0.01, 0.25, 0.5, 0.75, 0.99]
    payload = {
        "command": "sample",
        "config": {"identity": rec.id, "k": params[0], "m": params[1], "n": params[2],
                   "side": args.side, "count": args.count, "seed": seed, "base": args.base},
        "summary": {
            "mean": float(np.mean(values)),
            "std": float(np.std(values)),
            "quantiles": {str(q): float(v) for q, v in zip(qs, np.quantile(values, qs))},
        },
    }
    _write_report(args, "sample", payload)
    print(canonical_json(payload["summary"]), end="")
    return EXIT_OK


def cmd_ode_check(args) -> int:
    p = Lemma5Params(args.r, args.theta, args.a, args.lam)
    grid = GridSpec.quantile(args.grid_points, args.grid_eps)
    res = ode_residual(p, grid)
    payload = {
        "command": "ode-check",
        "config": {"r": p.r, "theta": p.theta, "a": p.a, "lam": p.lam, "grid": grid.to_json()},
        "residual": res,
    }
    _write_report(args, "ode_check", payload)
    print(f"max residual {res:.3e}")
    return EXIT_OK


def cmd_residual(args) -> int:
    if (args.law is None) == (args.grid_function is None):
        raise UsageError("give exactly one of --law and --grid-function")
    if args.law is not None:
        F = parse_law(args.law)
        source = args.law
    else:
        F = GridFunction.from_csv(Path(args.grid_function).read_text(encoding="utf-8"))
        source = str(args.grid_function)
    shift = parse_law(args.shift_law) if args.shift_law else None
    res = functional_eq_residual(args.eq, F, args.k, args.n, args.m, shift)
    payload = {
        "command": "residual",
        "config": {"eq": args.eq, "k": args.k, "m": args.m, "n": args.n,
                   "F": source, "shift_law": args.shift_law},
        "residual": res,
    }
    _write_report(args, "residual", payload)
    print(f"max residual {res:.3e}")
    return EXIT_OK


def cmd_solve_fp(args) -> int:
    init = None
    if args.init is not None:
        init = GridFunction.from_csv(Path(args.init).read_text(encoding="utf-8"))
    config = {"eq": args.eq, "k": args.k, "m": args.m, "n": args.n, "lam": args.lam,
              "points": args.points, "max_iter": args.max_iter, "tol": args.tol,
              "init": args.init or "clamped-linear", "patience": args.patience,
              "noise_floor": args.noise_floor}
    try:
        result = fixed_point_solve(args.eq, args.k, args.n, args.m, args.lam, args.points,
                                   init, args.max_iter, args.tol, args.patience, args.noise_floor)
    except NonConvergenceError as exc:
        _write_report(args, "solve_fp", {"command": "solve-fp", "config": config,
                                         "error": str(exc), "trace": exc.trace})
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _write_report(args, "solve_fp", {"command": "solve-fp", "config": config, **result.to_json()})
    atomic_write(_out_dir(args) / "solve_fp.csv", result.solution.to_csv())
    print(f"sweeps {result.iterations}, last change {result.trace[-1]:.3e}, converged {result.converged}")
    return EXIT_OK


def _gof_config(args, seed: int) -> GofConfig:
    return GofConfig(args.target, args.k, args.n, args.resamples, args.mc_block, seed, args.level)


def cmd_gof(args) -> int:
    seed = _require_seed(args)
    cfg = _gof_config(args, seed)
    data = read_data(args.data)
    report = gof_test(data, cfg)
    _write_report(args, "gof", {"command": "gof", "data": str(args.data), **report.to_json()})
    print(f"statistic {report.statistic:.6f}, p-value {report.p_value:.4f}: {report.decision}")
    return EXIT_FAIL if report.rejected else EXIT_OK


def cmd_calibrate(args) -> int:
    seed = _require_seed(args)
    cfg = _gof_config(args, seed)
    truth = parse_law(args.truth)
    summary = calibration_run(cfg, truth, args.repetitions)
    _write_report(args, "calibrate", {"command": "calibrate", **summary.to_json()})
    print(f"rejection rate {summary.rate:.4f} (SE {summary.se:.4f}) over {summary.repetitions} runs")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="logipareto",
        description="Verify and invert order-statistic identities of the logistic and Pareto II laws.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=False):
        p.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or ./{DEFAULT_OUTPUT})")
        if seed:
            p.add_argument("--seed", type=int, help="root seed (required when sampling)")

    p = sub.add_parser("catalog", help="list the identity catalog")
    common(p)
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("verify", help="verify identities by quadrature (and optionally Monte Carlo)")
    common(p, seed=True)
    p.add_argument("--identity", required=True, help="catalog id, demo id, or 'all'")
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--n-max", type=int, default=5, help="largest n when k/n are not given")
    p.add_argument("--base", default="matching", help="'matching' or Family:param=value,...")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--grid-points", type=int, default=201)
    p.add_argument("--grid-eps", type=float, default=1e-4)
    p.add_argument("--grid-lower", type=float)
    p.add_argument("--grid-upper", type=float)
    p.add_argument("--mc-size", type=int, help="Monte Carlo sample size per side (off by default)")
    p.add_argument("--quad-tol", type=float, default=1e-9, help="absolute tolerance per integral")
    p.add_argument("--quad-panels", type=int, default=4000, help="panel budget per integral")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sample", help="simulate one side of an identity")
    common(p, seed=True)
    p.add_argument("--identity", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--side", choices=("lhs", "rhs"), default="rhs")
    p.add_argument("--count", type=int, default=10_000)
    p.add_argument("--base", default="matching")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("ode-check", help="residual of the closed-form ODE solution")
    common(p)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--grid-points", type=int, default=201)
    p.add_argument("--grid-eps", type=float, default=1e-4)
    p.set_defaults(func=cmd_ode_check)

    p = sub.add_parser("residual", help="functional-equation residual of a CDF")
    common(p)
    p.add_argument("--eq", required=True, choices=("eq6", "eq9", "eq14"))
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--law", help="closed-form CDF, e.g. ParetoII:lam=1,power=1")
    p.add_argument("--grid-function", help="two-column CSV (y, F)")
    p.add_argument("--shift-law", help="mixing law; defaults to the one the equation uses")
    p.set_defaults(func=cmd_residual)

    p = sub.add_parser("solve-fp", help="recover a CDF by fixed-point iteration")
    common(p)
    p.add_argument("--eq", default="eq9", choices=("eq9", "eq14"))
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--init", help="initial CDF as two-column CSV (default min(lam y, 1))")
    p.add_argument("--patience", type=int, default=5, help="rising sweeps tolerated before giving up")
    p.add_argument("--noise-floor", type=float, default=1e-5,
                   help="changes below this never count as rising")
    p.set_defaults(func=cmd_solve_fp)

    for name, func, help_text in (
        ("gof", cmd_gof, "goodness-of-fit test on a data file"),
        ("calibrate", cmd_calibrate, "rejection rate of the test under a known law"),
    ):
        p = sub.add_parser(name, help=help_text)
        common(p, seed=True)
        if name == "gof":
            p.add_argument("--data", required=True, help="one value per line")
        else:
            p.add_argument("--truth", required=True, help="Family:param=value,...")
            p.add_argument("--repetitions", type=int, default=200)
        p.add_argument("--target", choices=("Logistic", "ParetoII"), default="Logistic")
        p.add_argument("--k", type=int, default=1)
        p.add_argument("--n", type=int, default=2)
        p.add_argument("--resamples", type=int, default=999)
        p.add_argument("--mc-block", type=int, default=10_000)
        p.add_argument("--level", type=float, default=0.05)
        p.set_defaults(func=func)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, DomainError, ParameterError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IdentityNotFound as exc:
        print(f"error: unknown identity {exc.args[0]!r}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, NonConvergenceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())
