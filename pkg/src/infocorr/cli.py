"""Command-line interface: ``infocorr <command> [options]``.

Exit codes: 0 success, 1 reference mismatch, 2 invalid scenario, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import reproduce
from .errors import DomainError, NumericalError, PoleError, ScenarioError
from .matkernel import DEFAULT_POLICY, RankPolicy
from .scenario import load_scenario, one_node, parse_grid, parse_list, parse_number

EXIT_OK, EXIT_MISMATCH, EXIT_SCENARIO, EXIT_NUMERIC = 0, 1, 2, 3


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.floating, float)):
        return float(f"{float(x):.17g}")
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items() if k != "curve"}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _rows_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt(v) for k, v in _jsonable(r).items()})
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    if isinstance(v, list):
        return " ".join(str(_fmt(x)) for x in v)
    return v


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _policy(args) -> RankPolicy:
    return RankPolicy(DEFAULT_POLICY.abs_floor if args.tol_abs is None else args.tol_abs,
                      DEFAULT_POLICY.rel_factor if args.tol_rel is None else args.tol_rel)


def _number(text: str) -> float:
    try:
        return float(parse_number(text))
    except ScenarioError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _scenario_overrides(args) -> dict:
    kw = {"policy": _policy(args)}
    if args.fd_step is not None:
        kw["fd_step"] = args.fd_step
    if args.time_grid is not None:
        kw["time_grid"] = tuple(parse_grid(args.time_grid))
    if args.region_grid is not None:
        kw["region_grid"] = args.region_grid
    if args.epsilon is not None:
        kw["epsilon"] = args.epsilon
    if args.seed is not None:
        kw["seed"] = args.seed
    return kw


def _table_output(result: dict, args, columns: list[str]) -> str:
    if args.format == "csv":
        return _rows_csv([{k: c[k] for k in columns} for c in result["cells"]])
    return json.dumps(_jsonable(result), indent=2) + "\n"


# ---------------------------------------------------------------------------
# commands


def cmd_table1(args) -> int:
    lam = None if args.lambda_a is None else [parse_number(args.lambda_a)]
    res = reproduce.table1(lam, args.beta1, t=args.t, policy=_policy(args), seed=args.seed or 0)
    _emit(_table_output(res, args, ["lambda_a", "case", "rank_That", "E_AA", "E_AB",
                                    "E_AA_norm", "E_AB_norm", "ok"]), args.out)
    return EXIT_OK if res["ok"] else EXIT_MISMATCH


def cmd_table2(args) -> int:
    res = reproduce.table2(t=args.t, policy=_policy(args), seed=args.seed or 0)
    _emit(_table_output(res, args, ["row", "lambda_b", "rank_That", "E_AA", "E_AB",
                                    "E_AA_norm", "E_AB_norm", "ok"]), args.out)
    return EXIT_OK if res["ok"] else EXIT_MISMATCH


def cmd_roots(args) -> int:
    res = reproduce.roots()
    if args.format == "csv":
        text = _rows_csv(res["roots"])
    else:
        text = json.dumps(_jsonable(res), indent=2) + "\n"
    _emit(text, args.out)
    return EXIT_OK if res["ok"] else EXIT_MISMATCH


def _window_report(res: dict, curve, args) -> None:
    if args.curve_out:
        Path(args.curve_out).write_text(curve.to_csv())
    if args.format == "csv":
        _emit(curve.to_csv(), args.out)
        sys.stderr.write(json.dumps(_jsonable(res)) + "\n")
    else:
        _emit(json.dumps(_jsonable(res), indent=2) + "\n", args.out)


def cmd_figure(args) -> int:
    kw = _scenario_overrides(args)
    kw.pop("seed", None)
    res = reproduce.figure(args.which, threshold=args.threshold, bridge=args.bridge, **kw)
    _window_report(res, res["curve"], args)
    return EXIT_OK if res["ok"] else EXIT_MISMATCH


def cmd_scan(args) -> int:
    sc = replace(load_scenario(args.scenario), **_scenario_overrides(args))
    curve, wins = reproduce.scan_scenario(sc, args.order, args.threshold, args.bridge)
    res = {"command": "scan", "scenario": args.scenario, "m_max": curve.m_max,
           "windows": [(w.t_start, w.t_end) for w in wins.windows],
           "bridged_needles": wins.needles, "threshold": args.threshold, "ok": True}
    _window_report(res, curve, args)
    return EXIT_OK


def cmd_longchain(args) -> int:
    if args.nodes < args.na + args.nb:
        raise ScenarioError("nodes must be at least na + nb", "nodes")
    ts = parse_grid(args.time_grid) if args.time_grid else np.linspace(0, 10, 101)
    theta = None if args.theta is None else [float(v) for v in parse_list(args.theta)]
    psi = None if args.psi is None else [float(v) for v in parse_list(args.psi)]
    for name, v in (("theta", theta), ("psi", psi)):
        if v is not None and len(v) != args.na:
            raise ScenarioError(f"expected {args.na} angles", name)
    res = reproduce.longchain(args.nodes, args.na, args.nb, ts, theta, psi, _policy(args))
    if args.format == "json":
        _emit(json.dumps(_jsonable(res), indent=2) + "\n", args.out)
    else:
        _emit(_rows_csv(res["rows"]), args.out)
    return EXIT_OK if res["ok"] else EXIT_MISMATCH


def cmd_report(args) -> int:
    sc = load_scenario(args.scenario) if args.scenario else one_node()
    sc = replace(sc, **_scenario_overrides(args))
    phi = None if args.phi is None else np.array([float(v) for v in parse_list(args.phi)])
    if phi is not None and len(phi) != sc.param_family().n_params:
        raise ScenarioError(f"expected {sc.param_family().n_params} angles", "phi")
    rep = reproduce.report(sc, args.t, phi)
    d = rep.as_dict()
    d["time_grid"] = [float(sc.time_grid[0]), float(sc.time_grid[-1]), len(sc.time_grid)]
    d["epsilon"] = sc.epsilon
    if args.format == "csv":
        _emit(_rows_csv([{k: v for k, v in d.items() if not isinstance(v, (list, dict))}]), args.out)
    else:
        _emit(json.dumps(_jsonable(d), indent=2) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("numerics")
    g.add_argument("--tol-abs", type=float, default=None, help="absolute singular-value floor")
    g.add_argument("--tol-rel", type=float, default=None, help="relative singular-value factor")
    g.add_argument("--fd-step", type=float, default=None, help="finite-difference step")
    g.add_argument("--time-grid", default=None, help="start:stop:step or a comma list")
    g.add_argument("--region-grid", type=int, default=None, help="grid points per parameter")
    g.add_argument("--epsilon", type=_number, default=None, help="region margin, e.g. pi/50")
    g.add_argument("--threshold", type=float, default=0.5, help="window threshold")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out", default=None, help="write the result here instead of stdout")
    g.add_argument("--format", choices=("json", "csv"), default=None,
                   help="output format; csv for longchain, json otherwise")

    p = argparse.ArgumentParser(prog="infocorr", description="Informational correlations in spin-1/2 chains.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("table1", parents=[common], help="one-node correlation table")
    s.add_argument("--lambda-a", default=None)
    s.add_argument("--beta1", type=_number, default=None)
    s.add_argument("--t", type=float, default=1.0)
    s.set_defaults(func=cmd_table1)

    s = sub.add_parser("table2", parents=[common], help="two-node correlation table")
    s.add_argument("--t", type=float, default=1.0)
    s.set_defaults(func=cmd_table2)

    s = sub.add_parser("roots", parents=[common], help="critical times")
    s.set_defaults(func=cmd_roots)

    for name, func, help_ in (("figure", cmd_figure, "reproduce a window scan"),
                              ("scan", cmd_scan, "window scan of a scenario file")):
        s = sub.add_parser(name, parents=[common], help=help_)
        if name == "figure":
            s.add_argument("which", type=int, choices=(1, 2))
        else:
            s.add_argument("scenario")
            s.add_argument("--order", type=int, default=None)
        s.add_argument("--bridge", type=int, default=2 if name == "figure" else 0,
                       help="bridge runs of at most this many sub-threshold samples")
        s.add_argument("--curve-out", default=None, help="also write the curve CSV here")
        s.set_defaults(func=func)

    s = sub.add_parser("longchain", parents=[common], help="single-excitation sweep")
    s.add_argument("--nodes", type=int, default=100)
    s.add_argument("--na", type=int, default=1)
    s.add_argument("--nb", type=int, default=1)
    s.add_argument("--theta", default=None)
    s.add_argument("--psi", default=None)
    s.set_defaults(func=cmd_longchain)

    s = sub.add_parser("report", parents=[common], help="correlation quartet for a scenario")
    s.add_argument("scenario", nargs="?", default=None)
    s.add_argument("--t", type=float, default=None)
    s.add_argument("--phi", default=None, help="comma list of angles")
    s.set_defaults(func=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    # parent-parser actions are shared, so the per-command default is applied here
    if args.format is None:
        args.format = "csv" if args.command == "longchain" else "json"
    try:
        return args.func(args)
    except ScenarioError as exc:
        sys.stderr.write(f"invalid scenario: {exc}\n")
        return EXIT_SCENARIO
    except (NumericalError, DomainError, PoleError, np.linalg.LinAlgError, ArithmeticError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
