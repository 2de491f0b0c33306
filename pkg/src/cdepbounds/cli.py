"""
Command-line entry point ``cdepbounds``.

Exit codes: 0 success, 1 usage error, 2 data or validation error, 3
numerical failure.  Reports are JSON (stdout unless ``--out``); flat tables
are CSV (``--table``).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

from .breakdown import bound_curve, breakdown_c, parse_grid
from .calibration import PropensityTable, calibration_report
from .data import DataError
from .dgp import VARIANTS, dgp_population, population_r2, variant_spec
from .effects import PARAMETERS, EffectRequest, effect_bounds
from .oracle import verify_suite
from ._version import __version__
from .reports import REPORT_FORMAT, load_config, make_report, population_from_source, write_report, write_table

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class NumericalError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_source(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("population source (exactly one, or via --config)")
    g.add_argument("--config", help="JSON configuration file")
    g.add_argument("--dgp", choices=sorted(VARIANTS), help="built-in design")
    g.add_argument("--data", help="delimited data file with a header row")
    g.add_argument("--population", help="report file whose population block is reused")
    g.add_argument("--outcome", default="y", help="outcome column (default y)")
    g.add_argument("--treatment", default="x", help="treatment column (default x)")
    g.add_argument("--covariates", default="", help="comma-separated covariate columns")
    g.add_argument("--min-arm-count", type=int, default=5)
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--table", help="also write a CSV table")


def _add_param(p: argparse.ArgumentParser, multiple: bool = False) -> None:
    if multiple:
        p.add_argument("--param", action="append", choices=PARAMETERS, help="parameter (repeatable)")
    else:
        p.add_argument("--param", choices=PARAMETERS, help="parameter")
    p.add_argument("--tau", type=float, help="quantile level for qte/cqte")
    p.add_argument("--cell", help="cell label for cate/cqte")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cdepbounds", description="Bounds on treatment effects under c-dependence.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("bounds", help="bounds at one value of c")
    _add_source(p)
    _add_param(p, multiple=True)
    p.add_argument("--c", type=float, help="sensitivity parameter in [0, 1]")

    p = sub.add_parser("curve", help="bounds over a grid of c")
    _add_source(p)
    _add_param(p)
    p.add_argument("--grid", help="start:stop:step or comma list (default 0:1:0.01)")

    p = sub.add_parser("breakdown", help="breakdown point of a sign conclusion")
    _add_source(p)
    _add_param(p)
    p.add_argument("--sign", choices=("positive", "negative"))
    p.add_argument("--tol", type=float)

    p = sub.add_parser("calibrate", help="leave-one-covariate-out propensity gaps")
    _add_source(p)
    p.add_argument("--probs", help="comma-separated quantile levels (default 0.5,0.75,0.9)")
    p.add_argument("--min-cell-weight", type=float)

    p = sub.add_parser("replicate-figure2", help="ATE curves for the design variants")
    p.add_argument("--step", type=float, default=0.005, help="grid step (default 0.005)")
    p.add_argument("--out-dir", default=".", help="directory for the tables and report")

    p = sub.add_parser("verify", help="compare closed forms with brute-force programs")
    p.add_argument("--cases", type=int, default=500, help="random cdf cases")
    p.add_argument("--mean-cases", type=int, default=100)
    p.add_argument("--bins", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    return parser


def _merged(args, cfg: dict, name: str, default=None):
    """Command-line value, else config value, else default."""
    v = getattr(args, name, None)
    if v is not None:
        return v
    return cfg.get(name, default)


def _resolve(args):
    cfg, base = {}, "."
    if getattr(args, "config", None):
        cfg = load_config(args.config)
        base = str(Path(args.config).parent)
    source = dict(cfg.get("source", {}))
    cli = {"dgp": args.dgp, "data": args.data, "population": args.population}
    if any(v is not None for v in cli.values()):
        source = {k: v for k, v in cli.items() if v is not None}
        base = "."
        if args.data:
            source["data"] = {
                "path": args.data, "outcome": args.outcome, "treatment": args.treatment,
                "covariates": [c for c in args.covariates.split(",") if c],
                "min_arm_count": args.min_arm_count,
            }
    if not source:
        raise UsageError("give a population source: --dgp, --data, --population or --config")
    pop, desc = population_from_source(source, base)
    return cfg, pop, desc


def _requests(args, cfg: dict, multiple: bool) -> list[EffectRequest]:
    kinds = args.param or (cfg.get("params") if multiple else None) or cfg.get("param")
    if kinds is None:
        raise UsageError("--param is required")
    if isinstance(kinds, str):
        kinds = [kinds]
    tau = _merged(args, cfg, "tau")
    cell = _merged(args, cfg, "cell")
    try:
        return [EffectRequest(k, tau if k in ("qte", "cqte") else None,
                              cell if k in ("cate", "cqte") else None) for k in kinds]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _interval_json(iv) -> dict:
    return {"lower": iv.lower, "upper": iv.upper}


def _check_finite(*values) -> None:
    if any(isinstance(v, float) and math.isnan(v) for v in values):
        raise NumericalError("computation produced NaN")


def _emit(report: dict, out) -> None:
    if out:
        write_report(report, out)
    else:
        sys.stdout.write(json.dumps(report, indent=2) + "\n")


def cmd_bounds(args) -> int:
    cfg, pop, desc = _resolve(args)
    c = _merged(args, cfg, "c")
    if c is None:
        raise UsageError("--c is required")
    results, rows = [], []
    for req in _requests(args, cfg, multiple=True):
        iv = effect_bounds(pop, req, float(c))
        _check_finite(iv.lower, iv.upper)
        results.append({"param": req.kind, "tau": req.tau, "cell": req.cell, "c": float(c),
                         **_interval_json(iv)})
        rows.append((req.label, float(c), iv.lower, iv.upper))
    _emit(make_report("bounds", desc, pop, results), args.out)
    if args.table:
        write_table(args.table, ("param", "c", "lower", "upper"), rows)
    return EXIT_OK


def cmd_curve(args) -> int:
    cfg, pop, desc = _resolve(args)
    (req,) = _requests(args, cfg, multiple=False)
    grid_text = _merged(args, cfg, "grid", "0:1:0.01")
    try:
        grid = parse_grid(grid_text) if isinstance(grid_text, str) else [float(v) for v in grid_text]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    curve = bound_curve(pop, req, grid)
    _check_finite(*curve.lower, *curve.upper)
    results = {"param": req.kind, "tau": req.tau, "cell": req.cell, "nested": curve.is_nested(),
               "rows": [{"c": c, "lower": lo, "upper": hi} for c, lo, hi in curve.rows()]}
    _emit(make_report("curve", desc, pop, results), args.out)
    if args.table:
        write_table(args.table, ("c", "lower", "upper"), curve.rows())
    return EXIT_OK


def cmd_breakdown(args) -> int:
    cfg, pop, desc = _resolve(args)
    (req,) = _requests(args, cfg, multiple=False)
    sign = _merged(args, cfg, "sign", "positive")
    tol = float(_merged(args, cfg, "tol", 1e-4))
    value = breakdown_c(pop, req, sign, tol)
    _check_finite(value)
    results = {"param": req.kind, "tau": req.tau, "cell": req.cell, "sign": sign,
               "tol": tol, "breakdown": value}
    _emit(make_report("breakdown", desc, pop, results), args.out)
    if args.table:
        write_table(args.table, ("param", "sign", "breakdown"), [(req.label, sign, value)])
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cfg, pop, desc = _resolve(args)
    probs = _merged(args, cfg, "probs", "0.5,0.75,0.9")
    if isinstance(probs, str):
        try:
            probs = [float(v) for v in probs.split(",") if v.strip()]
        except ValueError:
            raise UsageError(f"bad --probs {probs!r}") from None
    mcw = float(_merged(args, cfg, "min_cell_weight", 0.0))
    names = desc.get("covariates") or ["W"]
    table = PropensityTable.from_population(pop, names)
    rows = calibration_report(table, probs, mcw)
    _emit(make_report("calibrate", desc, pop, rows, probs=list(probs), min_cell_weight=mcw), args.out)
    if args.table:
        header = list(rows[0])
        write_table(args.table, header, [[r[h] for h in header] for r in rows])
    return EXIT_OK


FIGURE_PANELS = {
    "propensity": ("p09", "baseline", "p05"),
    "r2": ("r2_15", "baseline", "r2_60"),
}


def cmd_replicate(args) -> int:
    if not (0 < args.step <= 1):
        raise UsageError("--step must lie in (0, 1]")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    n = int(math.floor(1.0 / args.step + 1e-9))
    grid = [round(i * args.step, 12) for i in range(n + 1)]
    req = EffectRequest("ate")
    t0 = time.perf_counter()
    panels = {}
    for panel, names in FIGURE_PANELS.items():
        rows = []
        curves = {}
        for name in names:
            spec = variant_spec(name)
            pop = dgp_population(spec)
            curve = bound_curve(pop, req, grid)
            _check_finite(*curve.lower, *curve.upper)
            curves[name] = {
                "dgp": spec.to_dict(), "r2": population_r2(spec),
                "breakdown": breakdown_c(pop, req, "positive"), "nested": curve.is_nested(),
            }
            rows.extend((name, c, lo, hi) for c, lo, hi in curve.rows())
        write_table(out_dir / f"figure2_{panel}.csv", ("dgp", "c", "lower", "upper"), rows)
        panels[panel] = curves
    report = {"format": REPORT_FORMAT, "version": __version__, "command": "replicate-figure2",
              "step": args.step,
              "grid_points": len(grid), "panels": panels,
              "seconds": time.perf_counter() - t0}
    write_report(report, out_dir / "figure2_report.json")
    sys.stdout.write(json.dumps({p: {k: v["breakdown"] for k, v in c.items()}
                                 for p, c in panels.items()}, indent=2) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.cases < 1 or args.mean_cases < 1 or args.bins < 1:
        raise UsageError("case and bin counts must be positive")
    res = verify_suite(args.cases, args.mean_cases, args.bins, args.seed)
    report = {"format": REPORT_FORMAT, "version": __version__, "command": "verify", "results": res}
    _emit(report, args.out)
    if not res["passed"]:
        raise NumericalError("closed forms disagree with the brute-force programs")
    return EXIT_OK


COMMANDS = {
    "bounds": cmd_bounds,
    "curve": cmd_curve,
    "breakdown": cmd_breakdown,
    "calibrate": cmd_calibrate,
    "replicate-figure2": cmd_replicate,
    "verify": cmd_verify,
}


def run_cli(argv=None) -> int:
    """Run one command; return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage().strip())
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:  # pragma: no cover
    sys.exit(run_cli())


if __name__ == "__main__":  # pragma: no cover
    main()
