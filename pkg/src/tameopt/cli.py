"""Command-line interface: ``tameopt <subcommand> [options]``.

Every CSV starts with a ``# config-digest=... config=...`` line holding the
resolved configuration. Exit codes: 0 success, 1 solver error or failed
property, 2 malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import DimensionError, ParseError, TameOptError
from .experiments.config import RunConfig, load_config_file, write_csv
from .solvers.trajectory import fmt

EXIT_OK, EXIT_FAIL, EXIT_PARSE = 0, 1, 2


class InputError(Exception):
    """Bad user input detected by the CLI itself (exit code 2)."""


def _csv_list(text, cast=str) -> list:
    if isinstance(text, (list, tuple)):
        return [cast(v) for v in text]
    try:
        return [cast(v.strip()) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(f"bad list {text!r}: {exc}") from None


def _emit(cfg: RunConfig, name: str, header: list[str], rows) -> Path:
    path = write_csv(cfg.path(name), header, rows, cfg.header())
    print(f"wrote {path}")
    return path


def _print_table(header, rows) -> None:
    print(",".join(header))
    for r in rows:
        print(",".join(r))


# subcommands ----------------------------------------------------------------------


def cmd_lasso_compare(cfg: RunConfig) -> int:
    from .experiments.lasso_compare import METHODS, SUMMARY_HEADER, lasso_compare, path_figure
    from .solvers.instances import DEFAULT_LASSO, load_lasso
    from .solvers.schedule import StepSchedule

    inst = load_lasso(cfg.instances["lasso"]) if cfg.instances.get("lasso") else DEFAULT_LASSO
    methods = _csv_list(cfg.overrides["methods"])
    for m in methods:
        if m not in METHODS:
            raise InputError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
    schedule = StepSchedule.parse(cfg.overrides["schedule"])
    results = lasso_compare(inst, methods, cfg.overrides["iters"], schedule, cfg.threads)
    for r in results:
        r.trajectory.seed = cfg.seed
        path = cfg.path(f"lasso_{r.method}.csv")
        r.trajectory.write_csv(path, cfg.header())
        print(f"wrote {path}")
    rows = [r.row() for r in results]
    _emit(cfg, "lasso_summary.csv", SUMMARY_HEADER, rows)
    svg = cfg.path("lasso_paths.svg")
    path_figure(results, inst).save(svg)
    print(f"wrote {svg}")
    _print_table(SUMMARY_HEADER, rows)
    return EXIT_OK


def cmd_relu_activity(cfg: RunConfig) -> int:
    from .experiments.relu_activity import HEADER, relu_activity

    o = cfg.overrides
    if int(o["samples"]) < 1:
        raise InputError("samples must be at least 1")
    depths, widths = _csv_list(o["depths"], int), _csv_list(o["widths"], int)
    if not depths or not widths or min(depths + widths) < 1:
        raise InputError("depths and widths must be positive integers")
    rep = relu_activity(depths, widths, int(o["samples"]), cfg.seed, cfg.precision, float(o["scale"]), cfg.threads)
    rows = rep.rows()
    _emit(cfg, "relu_activity.csv", HEADER, rows)
    _print_table(HEADER, rows)
    return EXIT_OK


def cmd_momsos(cfg: RunConfig) -> int:
    import warnings

    from .momsos import PolyProgram, bound_sequence, extract_minimizer

    if not cfg.instances.get("program"):
        raise InputError("momsos needs --program FILE")
    prog = PolyProgram.load(cfg.instances["program"])
    o = cfg.overrides
    d_max = int(o["d_max"])
    if d_max < prog.min_order():
        raise InputError(f"--d-max {d_max} is below the smallest admissible order {prog.min_order()}")
    bs = bound_sequence(prog, d_max, float(o["tol"]), int(o["grid_points"]))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ext = extract_minimizer(bs.results[-1])
    header = ["d", "f_d", "status", "iterations", "primal_residual", "dual_residual", "gap"]
    rows = []
    for d, v, r in zip(bs.orders, bs.values, bs.results):
        res = r.sdp.residuals
        rows.append([str(d), fmt(v), r.status, str(r.sdp.iterations),
                     f"{res.get('primal', float('nan')):.3e}", f"{res.get('dual', float('nan')):.3e}",
                     f"{res.get('gap', float('nan')):.3e}"])
    _emit(cfg, "momsos_bounds.csv", header, rows)
    report = {
        "config_digest": cfg.digest,
        "ball": prog.ball,
        "bounds": [{"d": d, "f_d": v, "status": r.status} for d, v, r in zip(bs.orders, bs.values, bs.results)],
        "monotone": bs.monotone,
        "grid": None if bs.grid is None else {"value": bs.grid.value, "point": bs.grid.point.tolist()},
        "below_grid": bs.below_grid,
        "x_hat": ext.x.tolist(),
        "certified": ext.certified,
        "rank_one": ext.rank_one,
        "gap": ext.gap,
        "message": ext.message,
    }
    out = cfg.path("momsos_result.json")
    out.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {out}")
    _print_table(header, rows)
    if ext.message:
        print(f"note: {ext.message}")
    print(f"x_hat = {ext.x.tolist()} certified={ext.certified}")
    return EXIT_OK


def _load_piecewise(cfg: RunConfig):
    from .strat1d import PiecewisePoly

    if cfg.instances.get("piecewise"):
        path = Path(cfg.instances["piecewise"])
        return PiecewisePoly.from_json(path.read_text(encoding="utf-8"))
    if cfg.overrides.get("poly") is None:
        raise InputError("monotone needs --poly COEFFS or --piecewise FILE")
    from .strat1d._poly import to_fraction

    try:
        coeffs = [to_fraction(c) for c in _csv_list(cfg.overrides["poly"])]
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad coefficient list: {exc}") from None
    return PiecewisePoly.polynomial(coeffs)


def cmd_monotone(cfg: RunConfig) -> int:
    from .strat1d import monotonicity_decomposition

    f = _load_piecewise(cfg)
    a, b = cfg.overrides["interval"]
    try:
        dec = monotonicity_decomposition(f, a, b)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    header = ["lo", "hi", "label", "lo_float", "hi_float"]
    rows = [[str(lo), str(hi), lab, fmt(float(lo)), fmt(float(hi))] for lo, hi, lab in dec.intervals()]
    _emit(cfg, "monotone.csv", header, rows)
    _print_table(header, rows)
    return EXIT_OK


def cmd_saset(cfg: RunConfig) -> int:
    from .strat1d import parse_saset, solve_poly_inequality

    o = cfg.overrides
    if o.get("solve") is not None:
        S = solve_poly_inequality(_csv_list(o["solve"], lambda s: s), o["relation"])
    elif o.get("set") is not None:
        S = parse_saset(o["set"])
    else:
        raise InputError("saset needs a SET argument or --solve COEFFS")
    for op, arg in o.get("ops", []):
        if op == "complement":
            S = ~S
            continue
        T = parse_saset(arg)
        S = {"union": S | T, "intersect": S & T, "difference": S - T}[op]
    header = ["kind", "lo", "hi", "lo_float", "hi_float"]
    rows = []
    for c in S:
        kind = "point" if c.is_point else "interval"
        rows.append([kind, str(c.lo), str(c.hi), fmt(float(c.lo)), fmt(float(c.hi))])
    _emit(cfg, "saset.csv", header, rows)
    print(str(S))
    return EXIT_OK


def cmd_clarke(cfg: RunConfig) -> int:
    from .expr import parse_expr
    from .subdiff import ad_derivative, clarke_generators, min_norm_element

    o = cfg.overrides
    text = o["expr"]
    if text.startswith("@"):
        text = Path(text[1:]).read_text(encoding="utf-8")
    e = parse_expr(text)
    pt = np.array(_csv_list(o["point"], float))
    if len(pt) != e.arity:
        raise InputError(f"point has {len(pt)} coordinates, expression arity is {e.arity}")
    kw = {"rng_seed": cfg.seed}
    if o.get("radii"):
        kw["radii"] = _csv_list(o["radii"], float)
    if o.get("samples"):
        kw["samples_per_radius"] = int(o["samples"])
    hull = clarke_generators(e, pt, **kw)
    mn = min_norm_element(hull)
    ad = ad_derivative(e, pt)
    header = ["kind"] + [f"g{i}" for i in range(hull.dim)]
    rows = [["generator"] + [fmt(v) for v in g] for g in hull.generators]
    rows.append(["min_norm"] + [fmt(v) for v in mn.point])
    rows.append(["ad"] + [fmt(v) for v in ad])
    _emit(cfg, "clarke.csv", header, rows)
    rec = cfg.path("clarke_hull.json")
    rec.write_text(hull.to_record() + "\n", encoding="utf-8")
    print(f"wrote {rec}")
    _print_table(header, rows)
    print(f"{hull.flag} hull; distance to 0 = {mn.distance:.6g}; critical={mn.distance <= 1e-6}")
    return EXIT_OK


def cmd_suite(cfg: RunConfig) -> int:
    from .suite import run_suite, select

    filt = cfg.overrides.get("filter")
    if filt and not select(filt):
        raise InputError(f"no property matches --filter {filt!r}")
    outcomes = run_suite(filt, cfg.seed)
    for oc in outcomes:
        print(oc.line())
    rows = [[oc.name, "pass" if oc.passed else "fail", oc.detail] for oc in outcomes]
    _emit(cfg, "suite.csv", ["property", "status", "detail"], rows)
    failed = [oc.name for oc in outcomes if not oc.passed]
    if failed:
        print("failed: " + ", ".join(failed))
        return EXIT_FAIL
    print(f"all {len(outcomes)} properties passed")
    return EXIT_OK


COMMANDS = {
    "lasso-compare": cmd_lasso_compare,
    "relu-activity": cmd_relu_activity,
    "momsos": cmd_momsos,
    "monotone": cmd_monotone,
    "saset": cmd_saset,
    "clarke": cmd_clarke,
    "suite": cmd_suite,
}

DEFAULTS = {
    "lasso-compare": {"methods": "ssm,prox,nsbfgs", "schedule": "power:1:1", "iters": {}},
    "relu-activity": {"depths": "1,2,4,8", "widths": "1,4,16,64", "samples": 100000, "scale": 1.0},
    "momsos": {"d_max": 2, "tol": 1e-6, "grid_points": 1000000},
    "monotone": {"interval": ["-3", "3"]},
    "saset": {"relation": "<"},
    "clarke": {},
    "suite": {},
}

# flag dest -> (where it goes, key)
INSTANCE_FLAGS = {"instance": "lasso", "program": "program", "piecewise": "piecewise"}


# argument parsing -----------------------------------------------------------------


class _SetOp(argparse.Action):
    """Collect ``--union/--intersect/--difference/--complement`` in command-line order."""

    def __call__(self, parser, namespace, values, option_string=None):
        ops = list(getattr(namespace, "ops", None) or [])
        ops.append((self.const, values))
        namespace.ops = ops


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="random seed (default 0)")
    common.add_argument("--out", help="output directory (default .)")
    common.add_argument("--config", help="JSON run configuration; flags override it")
    common.add_argument("--precision", choices=["f64", "f32"], help="floating point precision (default f64)")
    common.add_argument("--threads", type=int, help="worker threads; results do not depend on it")

    p = argparse.ArgumentParser(prog="tameopt", description="Nonsmooth tame optimization experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("lasso-compare", parents=[common], help="SSM vs prox-gradient vs BFGS on a LASSO instance")
    s.add_argument("--instance", help='JSON {"A", "b", "lambda", "x0"}; default instance if omitted')
    s.add_argument("--methods", help="comma list from ssm,prox,nsbfgs")
    s.add_argument("--schedule", help="SSM steps: power:C:ALPHA, constant:G or custom:g1,g2,...")
    s.add_argument("--iters", type=int, help="iterations for every selected method")

    s = sub.add_parser("relu-activity", parents=[common], help="probability that a random ReLU net hits a kink")
    s.add_argument("--depths", help="comma list of depths L")
    s.add_argument("--widths", help="comma list of widths w")
    s.add_argument("--samples", type=int, help="samples per (L, w) cell")
    s.add_argument("--scale", type=float, help="standard deviation of weights and inputs")

    s = sub.add_parser("momsos", parents=[common], help="moment relaxation bounds for a polynomial program")
    s.add_argument("--program", help="polynomial program JSON")
    s.add_argument("--d-max", dest="d_max", type=int, help="largest relaxation order")
    s.add_argument("--tol", type=float, help="monotonicity tolerance")
    s.add_argument("--grid-points", dest="grid_points", type=int, help="grid size for the upper bound")

    s = sub.add_parser("monotone", parents=[common], help="monotonicity decomposition of a (piecewise) polynomial")
    s.add_argument("--poly", help="coefficients, lowest degree first, e.g. 0,-3,0,1")
    s.add_argument("--piecewise", help="piecewise polynomial JSON")
    s.add_argument("--interval", nargs=2, metavar=("A", "B"), help="interval (a, b); -inf/+inf allowed")

    s = sub.add_parser("saset", parents=[common], help="boolean algebra of univariate semialgebraic sets")
    s.add_argument("set", nargs="?", help="set in text form, e.g. '{0} | (1,2)'")
    s.add_argument("--solve", help="start from {x : p(x) REL 0}; coefficients lowest degree first")
    s.add_argument("--relation", choices=["<", "<=", ">", ">=", "=", "==", "!="], help="relation for --solve")
    for op in ("union", "intersect", "difference"):
        s.add_argument(f"--{op}", action=_SetOp, const=op, metavar="SET", dest="ops")
    s.add_argument("--complement", action=_SetOp, const="complement", nargs=0, dest="ops")

    s = sub.add_parser("clarke", parents=[common], help="Clarke subdifferential generators at a point")
    s.add_argument("expr", help="expression text, or @FILE")
    s.add_argument("--point", required=True, help="comma list of coordinates")
    s.add_argument("--radii", help="comma list of decreasing sampling radii")
    s.add_argument("--samples", type=int, help="samples per radius")

    s = sub.add_parser("suite", parents=[common], help="run every invariant with fixed seeds")
    s.add_argument("--filter", help="module name or property prefix, comma separated")
    return p


def resolve(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, the config file and flags (flags win)."""
    cmd = args.command
    file_cfg = load_config_file(args.config) if args.config else {}
    overrides = json.loads(json.dumps(DEFAULTS[cmd]))
    overrides.update(file_cfg.get("overrides", {}))
    instances = dict(file_cfg.get("instances", {}))
    skip = {"command", "config", "seed", "out", "precision", "threads"}
    for key, val in vars(args).items():
        if key in skip or val is None:
            continue
        if key in INSTANCE_FLAGS:
            instances[INSTANCE_FLAGS[key]] = val
        elif key == "iters":
            overrides["iters"] = {m: val for m in _csv_list(overrides["methods"])}
        elif key == "ops":
            overrides["ops"] = [list(o) for o in val]
        else:
            overrides[key] = val
    seed = args.seed if args.seed is not None else file_cfg.get("seed", 0)
    precision = args.precision or file_cfg.get("precision", "f64")
    threads = args.threads if args.threads is not None else file_cfg.get("threads", 1)
    if precision == "f32" and cmd != "relu-activity":
        raise InputError("--precision f32 is only supported by relu-activity")
    if int(threads) < 1:
        raise InputError("--threads must be at least 1")
    return RunConfig(cmd, int(seed), args.out or ".", instances, overrides, precision, int(threads))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except (InputError, ParseError, DimensionError) as exc:
        print(f"tameopt {args.command}: input error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"tameopt {args.command}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except TameOptError as exc:
        print(f"tameopt {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        print(f"tameopt {args.command}: input error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
