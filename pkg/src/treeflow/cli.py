"""Command-line front end.

Exit codes: 0 optimal and certified, 1 infeasible or failed verification,
2 invalid input.  Numbers are printed in half units next to a decimal.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction

from . import ksubmod, lconvex, multiflow as mf, oracles
from .flow_engine import Infeasible

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INVALID = 2


class InputError(Exception):
    pass


def _halves(value) -> str:
    value = Fraction(value)
    h = 2 * value
    if h.denominator == 1:
        return f"{int(h)} halves ({float(value):g})"
    return f"{value} ({float(value):g})"


def _load(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _load_instance(path) -> mf.Instance:
    try:
        return mf.instance_from_json(_load(path))
    except mf.InvalidInstance as exc:
        raise InputError(f"{path}: {exc}") from None


def _dump(obj, path, out):
    text = json.dumps(obj, indent=2)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text, file=out)


def _report_stats(sol: mf.Solution, out):
    st = sol.stats
    if "phases" in st:
        per = ", ".join(f"sigma={ph['sigma']}:{ph['steps']}" for ph in st["phases"])
        print(f"phases: {len(st['phases'])} ({per})", file=out)
    if "iterations" in st:
        print(f"descent iterations: {st['iterations']}", file=out)
    if "flows" in st:
        print(f"max-flow computations: {st['flows']}", file=out)


# ---- subcommands --------------------------------------------------------------

def cmd_solve(args, out) -> int:
    inst = _load_instance(args.input)
    if inst.problem == "MULTIWAY":
        return _print_multiway(mf.multiway_cut(inst), args.output, out)
    try:
        if inst.problem == "MCMF":
            sol, red = mf.solve_mcmf(inst, args.algorithm)
        else:
            solver = mf.solve_scaling if args.algorithm == "scaling" else mf.solve_descent
            sol, red = solver(inst), None
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=out)
        return EXIT_FAIL
    doc = mf.solution_to_json(sol)
    if red is not None:
        doc["flow_value_halves"] = int(2 * mf.flow_value(inst, sol.paths))
        doc["reduced"] = mf.solution_to_json(red)
    _dump(doc, args.output, out)
    print(f"value: {_halves(sol.value)}", file=out)
    _report_stats(sol, out)
    if args.verify:
        ok, report = _verify_doc(inst, doc)
        for line in report:
            print(f"violation: {line}", file=out)
        print("verified" if ok else "verification FAILED", file=out)
        if not ok:
            return EXIT_FAIL
    return EXIT_OK if sol.certified else EXIT_FAIL


def _verify_doc(inst: mf.Instance, doc) -> tuple[bool, list]:
    """Check a solution document; potentials refer to the perturbed costs."""
    if inst.problem == "MCMF":
        red = mf.reduce_mcmf(inst)
        ok, report = _verify_doc(red.instance, doc.get("reduced", {}))
        paths = mf.paths_from_json(inst, doc)
        report = list(report) + mf.check_paths(inst, paths)
        x = mf.flow_support(inst, paths)
        if any(xe > 2 * e.cap for e, xe in zip(inst.edges, x)):
            report.append("contracted flow exceeds a capacity")
        if 2 * mf.flow_value(inst, paths) != 2 * mf.lovasz_cherkassky_value(inst):
            report.append("flow value differs from the sum of isolating cuts over two")
        if 2 * mf.primal_cost(inst, paths) != doc.get("value_halves"):
            report.append("value_halves does not match the paths")
        return not report, report
    paths = mf.paths_from_json(inst, doc)
    p = mf.potential_from_json(inst, doc)
    pinst, _ = mf.perturb_costs(inst)
    ok, report = mf.verify_optimality(pinst, paths, p)
    report = list(report)
    if 2 * mf.primal_cost(inst, paths) != doc.get("value_halves"):
        report.append("value_halves does not match the paths")
    return not report, report


def cmd_verify(args, out) -> int:
    inst = _load_instance(args.input)
    if inst.problem == "MULTIWAY":
        raise InputError("verify handles node-demand and MCMF instances")
    doc = _load(args.solution)
    if not isinstance(doc, dict):
        raise InputError("solution must be a JSON object")
    try:
        ok, report = _verify_doc(inst, doc)
    except mf.InvalidInstance as exc:
        raise InputError(f"{args.solution}: {exc}") from None
    for line in report:
        print(f"violation: {line}", file=out)
    print("certified optimal" if ok else "NOT certified", file=out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_oracle(args, out) -> int:
    inst = _load_instance(args.input)
    try:
        if inst.problem == "MULTIWAY":
            part, val = oracles.brute_force_multiway(inst, args.budget)
            print(f"value: {_halves(val)}", file=out)
            print("partition: " + json.dumps({str(i): s for i, s in sorted(part.items())}),
                  file=out)
            return EXIT_OK
        if inst.problem == "MCMF":
            inst = mf.reduce_mcmf(inst).instance
        x, val = oracles.brute_force_L(inst, args.budget)
    except oracles.TooLarge as exc:
        print(f"too large for the oracle: {exc}", file=out)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"infeasible: {exc}", file=out)
        return EXIT_FAIL
    print(f"value: {_halves(val)}", file=out)
    print("support_halves: " + json.dumps({str(k): v for k, v in enumerate(x) if v}), file=out)
    return EXIT_OK


def _print_multiway(res: mf.MultiwayResult, path, out) -> int:
    doc = {
        "relaxation_halves": int(2 * res.relaxation),
        "cut_halves": int(2 * res.cut),
        "partition": {str(i): s for i, s in sorted(res.partition.items())},
        "rounded_toward": res.target,
    }
    _dump(doc, path, out)
    print(f"relaxation: {_halves(res.relaxation)}", file=out)
    print(f"rounded cut: {_halves(res.cut)}", file=out)
    return EXIT_OK


def cmd_multiway(args, out) -> int:
    inst = _load_instance(args.input)
    return _print_multiway(mf.multiway_cut(inst), args.output, out)


def cmd_ksubmod(args, out) -> int:
    try:
        f = ksubmod.termsum_from_json(_load(args.input))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{args.input}: {exc}") from None
    try:
        x, val = ksubmod.minimize(f)
    except ksubmod.AllInfinite:
        print("infeasible: every point has infinite value", file=out)
        return EXIT_FAIL
    print(f"point: {json.dumps(list(x))}", file=out)
    print(f"value: {_halves(val)}", file=out)
    return EXIT_OK


def cmd_lconvex(args, out) -> int:
    try:
        om = lconvex.objective_from_json(_load(args.input))
        om.check_lconvex()
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{args.input}: {exc}") from None
    if args.start:
        start = _load(args.start)
        start = start["x"] if isinstance(start, dict) else start
    else:
        start = [om.tree.root] * om.n
    if len(start) != om.n or not all(isinstance(v, int) and 0 <= v < om.tree.n for v in start):
        raise InputError("start point must list one tree vertex per coordinate")
    try:
        x, trace = lconvex.steepest_descent(om, start)
    except lconvex.EmptyDomain as exc:
        print(f"infeasible: {exc}", file=out)
        return EXIT_FAIL
    print(f"point: {json.dumps(list(x))}", file=out)
    print(f"value: {_halves(trace.values[-1])}", file=out)
    print(f"steps: {trace.steps} ({' '.join(trace.sides) or 'none'})", file=out)
    return EXIT_OK


def cmd_gen(args, out) -> int:
    if args.terminals > args.nodes or args.nodes < 1:
        raise InputError("need 1 <= terminals <= nodes")
    rng = random.Random(args.seed)
    inst = mf.random_instance(rng, args.nodes, args.terminals, args.maxcap, args.maxcost,
                              problem=args.problem)
    _dump(mf.instance_to_json(inst), args.output, out)
    return EXIT_OK


# ---- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="treeflow",
                                 description="Multiflow, k-submodular and tree-convex solvers.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve an instance")
    p.add_argument("--input", required=True)
    p.add_argument("--algorithm", choices=["scaling", "descent"], default="scaling")
    p.add_argument("--output")
    p.add_argument("--verify", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="certify a solution file")
    p.add_argument("--input", required=True)
    p.add_argument("--solution", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="exhaustive reference value")
    p.add_argument("--input", required=True)
    p.add_argument("--budget", type=int, default=oracles.DEFAULT_BUDGET)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("multiway", help="multiway cut relaxation and rounding")
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_multiway)

    p = sub.add_parser("ksubmod-min", help="minimize a sum of basic k-submodular terms")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_ksubmod)

    p = sub.add_parser("lconvex-min", help="steepest descent on a 2-separable objective")
    p.add_argument("--input", required=True)
    p.add_argument("--start")
    p.set_defaults(func=cmd_lconvex)

    p = sub.add_parser("gen", help="random feasible instance")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--terminals", type=int, required=True)
    p.add_argument("--maxcap", type=int, default=3)
    p.add_argument("--maxcost", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--problem", choices=["N", "MCMF", "MULTIWAY"], default="N")
    p.add_argument("--output")
    p.set_defaults(func=cmd_gen)
    return ap


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except InputError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
