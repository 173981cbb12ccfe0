"""Command-line interface.

Exit codes: 0 on success, 1 for infeasible/failed verification outcomes,
2 for invalid usage or malformed input.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import covering, mediated, milp, rewrite, search
from .core import AlphaWeight, DomainError, InvalidInputError, normalize_alpha


def _parse_alpha(text: str) -> AlphaWeight:
    try:
        parts = tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise InvalidInputError(f"--alpha expects comma-separated integers: {text!r}") from exc
    return normalize_alpha(parts)


def _parse_frac(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidInputError(f"expected a rational number, got {text!r}") from exc


def _budget(args) -> search.SearchBudget:
    return search.SearchBudget(
        max_cardinality=getattr(args, "max_card", None),
        node_limit=getattr(args, "node_limit", None),
        time_limit=getattr(args, "time_limit", None))


def _supplier(args) -> rewrite.GraphSupplier:
    if getattr(args, "supplier", "optimal") == "binary":
        return rewrite.binary_supplier()
    return rewrite.optimal_supplier(_budget(args))


def cmd_bounds(args) -> int:
    ctx = _parse_alpha(args.alpha)
    print(json.dumps({"lb": mediated.lower_bound(ctx),
                      "ub": mediated.upper_bound(ctx)}))
    return 0


def cmd_solve(args) -> int:
    ctx = _parse_alpha(args.alpha)
    out = search.solve_exact(ctx, _budget(args))
    if args.dot:
        Path(args.dot).write_text(mediated.to_dot(out.graph))
    payload = mediated.to_json_dict(out.graph)
    payload["status"] = out.status
    payload["cardinality"] = out.cardinality
    print(json.dumps(payload))
    return 0


def cmd_soc(args) -> int:
    ctx = _parse_alpha(args.alpha)
    out = search.solve_exact(ctx, _budget(args))
    system = mediated.to_soc(out.graph)
    for con in system.constraints:
        print(f"{con.lhs}^2 <= {con.factors[0]} * {con.factors[1]}")
    return 0


def cmd_milp_emit(args) -> int:
    ctx = _parse_alpha(args.alpha)
    options = milp.ModelOptions(vi1=args.vi1, vi2=args.vi2, vi3=args.vi3,
                                tree=args.tree, eps=args.eps)
    out_path = Path(args.out)
    if args.delta == "auto":
        lo, hi = milp.delta_range(ctx)
        manifest = []
        for delta in range(lo, hi + 1):
            model = milp.build_model(ctx, delta, options)
            path = out_path.with_name(f"{out_path.stem}_d{delta}{out_path.suffix}")
            path.write_text(milp.emit_lp(model))
            manifest.append({"delta": delta, "file": str(path)})
        print(json.dumps({"models": manifest}))
        return 0
    model = milp.build_model(ctx, int(args.delta), options)
    out_path.write_text(milp.emit_lp(model))
    print(json.dumps({"models": [{"delta": int(args.delta), "file": str(out_path)}]}))
    return 0


def cmd_milp_parse(args) -> int:
    ctx = _parse_alpha(args.alpha)
    model = milp.build_model(ctx, args.delta, milp.ModelOptions())
    text = Path(args.sol).read_text()
    graph = milp.parse_solution(model, text)
    print(mediated.dumps(graph))
    return 0


def cmd_represent(args) -> int:
    ctx = _parse_alpha(args.alpha)
    p = _parse_frac(args.p)
    builder = rewrite.CONSTRUCTIONS[args.construction]
    program = builder(p, args.d1, ctx)
    if args.rationalize:
        program = rewrite.rationalize_to_soc(program, _supplier(args))
    m_e, l_e = rewrite.complexity(program)
    payload = rewrite.to_json_dict(program)
    payload["m_E"] = m_e
    payload["L_E"] = l_e
    text = json.dumps(payload)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text)
    return 0


def cmd_verify(args) -> int:
    data = json.loads(Path(args.program).read_text())
    program = rewrite.from_json_dict(data)
    report = rewrite.verify_representation(program, mode=args.mode,
                                           trials=args.trials, seed=args.seed)
    print(json.dumps({"ok": report.ok, "mode": report.mode,
                      "checked": report.checked,
                      "failures": list(report.failures)}))
    return 0 if report.ok else 1


def cmd_cover_gen(args) -> int:
    inst = covering.generate_instance(args.demand, args.facilities,
                                      _parse_frac(args.p), _parse_alpha(args.alpha),
                                      args.seed)
    payload = {
        "demand": [list(pt) for pt in inst.demand],
        "weights": list(inst.weights),
        "facilities": inst.facilities,
        "p": str(inst.p),
        "alpha": list(inst.alpha.s),
        "budget": str(inst.budget),
        "big_m": inst.big_m,
        "seed": inst.seed,
    }
    text = json.dumps(payload)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text)
    return 0


def _cover_model(args):
    inst = covering.generate_instance(args.demand, args.facilities,
                                      _parse_frac(args.p), _parse_alpha(args.alpha),
                                      args.seed)
    return covering.build_covering_model(inst, _supplier(args))


def cmd_cover_emit(args) -> int:
    model = _cover_model(args)
    text = covering.emit_covering(model)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text)
    return 0


def cmd_cover_count(args) -> int:
    model = _cover_model(args)
    print(covering.counts_report(model))
    return 0


def _add_budget_args(sub):
    sub.add_argument("--max-card", type=int, default=None, dest="max_card")
    sub.add_argument("--node-limit", type=int, default=None, dest="node_limit")
    sub.add_argument("--time-limit", type=float, default=None, dest="time_limit")


def _add_cover_args(sub):
    sub.add_argument("--demand", type=int, required=True)
    sub.add_argument("--facilities", type=int, required=True)
    sub.add_argument("--p", required=True)
    sub.add_argument("--alpha", required=True)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--supplier", choices=["optimal", "binary"], default="optimal")
    _add_budget_args(sub)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="powercone",
        description="SOC representations of rational power cones via mediated graphs")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("bounds", help="cardinality bounds for a weight vector")
    sub.add_argument("--alpha", required=True)
    sub.set_defaults(fn=cmd_bounds)

    sub = subs.add_parser("solve", help="minimum-cardinality mediated graph")
    sub.add_argument("--alpha", required=True)
    sub.add_argument("--dot", default=None, help="write a GraphViz rendering here")
    _add_budget_args(sub)
    sub.set_defaults(fn=cmd_solve)

    sub = subs.add_parser("soc", help="rotated-cone system of the solved graph")
    sub.add_argument("--alpha", required=True)
    _add_budget_args(sub)
    sub.set_defaults(fn=cmd_soc)

    sub = subs.add_parser("milp", help="mixed-integer model tooling")
    milp_subs = sub.add_subparsers(dest="milp_command", required=True)
    sub = milp_subs.add_parser("emit", help="write the model in LP format")
    sub.add_argument("--alpha", required=True)
    sub.add_argument("--delta", default="auto",
                     help="candidate node count, or 'auto' for the bound window")
    sub.add_argument("--eps", type=int, default=1)
    sub.add_argument("--vi1", action="store_true")
    sub.add_argument("--vi2", action="store_true")
    sub.add_argument("--vi3", action="store_true")
    sub.add_argument("--tree", action="store_true")
    sub.add_argument("--out", required=True)
    sub.set_defaults(fn=cmd_milp_emit)
    sub = milp_subs.add_parser("parse", help="decode a solution file into a graph")
    sub.add_argument("--alpha", required=True)
    sub.add_argument("--delta", type=int, required=True)
    sub.add_argument("--sol", required=True)
    sub.set_defaults(fn=cmd_milp_parse)

    sub = subs.add_parser("represent", help="extended representation of a norm-power bound")
    sub.add_argument("--p", required=True)
    sub.add_argument("--d1", type=int, required=True)
    sub.add_argument("--alpha", required=True)
    sub.add_argument("--construction", choices=sorted(rewrite.CONSTRUCTIONS),
                     default="direct")
    sub.add_argument("--rationalize", action="store_true")
    sub.add_argument("--supplier", choices=["optimal", "binary"], default="optimal")
    sub.add_argument("--out", default=None)
    _add_budget_args(sub)
    sub.set_defaults(fn=cmd_represent)

    sub = subs.add_parser("verify", help="check a rationalized program")
    sub.add_argument("--program", required=True)
    sub.add_argument("--mode", choices=["structural", "sampling"], default="structural")
    sub.add_argument("--trials", type=int, default=100)
    sub.add_argument("--seed", type=int, default=0)
    sub.set_defaults(fn=cmd_verify)

    sub = subs.add_parser("cover", help="covering-location model tooling")
    cover_subs = sub.add_subparsers(dest="cover_command", required=True)
    sub = cover_subs.add_parser("gen", help="generate a seeded instance")
    _add_cover_args(sub)
    sub.add_argument("--out", default=None)
    sub.set_defaults(fn=cmd_cover_gen)
    sub = cover_subs.add_parser("emit", help="write the covering model in LP format")
    _add_cover_args(sub)
    sub.add_argument("--out", default=None)
    sub.set_defaults(fn=cmd_cover_emit)
    sub = cover_subs.add_parser("count", help="constraint counting report")
    _add_cover_args(sub)
    sub.set_defaults(fn=cmd_cover_count)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (InvalidInputError, DomainError, FileNotFoundError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
