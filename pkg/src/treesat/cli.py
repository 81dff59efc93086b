"""Command-line front end.

Exit codes: 0 success, 2 verification/construction failure, 3 budget or
cap exhausted, 4 input error.  All reports are deterministic given the
flags and seed; JSON output carries a schema version and the resolved
configuration, with large integers as decimal strings.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from fractions import Fraction

from . import bounds, formula, recursion, satcheck, search, trees
from .errors import BudgetExhaustedError, CapExceededError, TreesatError
from .recursion import RunStatus

EXIT_OK = 0
EXIT_VERIFY = 2
EXIT_BUDGET = 3
EXIT_INPUT = 4

SCHEMA_VERSION = 1


def _json_report(payload: dict, config: dict) -> str:
    body = {"schemaVersion": SCHEMA_VERSION, "config": config}
    body.update(payload)
    return json.dumps(body, sort_keys=True, separators=(",", ":"))


def _emit(args, payload: dict, text_lines: list[str], config: dict) -> None:
    if args.format == "json":
        print(_json_report(payload, config))
    else:
        for line in text_lines:
            print(line)


def _parse_k_range(spec: str) -> list[int]:
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(spec)]


def _ratio_decimal(d: int, k: int, digits: int = 9) -> str:
    """d*e*k / 2^(k+1) as a decimal string (non-rigorous display value)."""
    e = bounds.e_enclosure(40)
    mid = (e.lower + e.upper) / 2
    ratio = Fraction(d * k) * mid / (1 << (k + 1))
    scaled = ratio.numerator * 10**digits // ratio.denominator
    text = str(scaled).rjust(digits + 1, "0")
    return f"{text[:-digits]}.{text[-digits:]}"


def cmd_construct(args) -> int:
    config = {
        "command": "construct",
        "k": args.k,
        "d": str(args.d) if args.d is not None else None,
        "budget": args.budget,
        "cap": str(args.cap),
        "emitDimacs": args.emit_dimacs,
    }
    params = recursion.derive_params(args.k, args.d)
    trace = recursion.run(params, max_steps=args.budget)
    payload = {
        "k": params.k,
        "d": str(params.d),
        "status": trace.status.value,
        "steps": len(trace.steps),
    }
    lines = [
        f"k = {params.k}",
        f"d = {params.d}",
        f"status = {trace.status.value}",
        f"steps = {len(trace.steps)}",
        f"ratio d*e*k/2^(k+1) ~ {_ratio_decimal(params.d, params.k)} (non-rigorous)",
    ]
    if args.trace_out:
        with open(args.trace_out, "w", encoding="ascii", newline="\n") as handle:
            handle.write(recursion.trace_to_json(trace) + "\n")
        lines.append(f"trace written to {args.trace_out}")
    if trace.status is not RunStatus.REACHED_WEIGHT_ONE:
        _emit(args, payload, lines, config)
        return EXIT_BUDGET if trace.status is RunStatus.BUDGET_EXHAUSTED else EXIT_VERIFY
    plan = trees.plan_from_trace(trace)
    payload.update(
        {
            "leafCount": str(plan.leaf_count),
            "depth": str(plan.depth),
            "planValid": bool(plan.validate()),
        }
    )
    lines += [
        f"leafCount = {plan.leaf_count}",
        f"depth = {plan.depth}",
        f"ratio = {_ratio_decimal(params.d, params.k)} (non-rigorous)",
    ]
    if args.plan_out:
        with open(args.plan_out, "w", encoding="ascii", newline="\n") as handle:
            handle.write(trees.plan_to_json(plan) + "\n")
        lines.append(f"plan written to {args.plan_out}")
    if args.emit_dimacs:
        try:
            tree = trees.materialize(plan, cap_vertices=args.cap)
        except CapExceededError as exc:
            payload["capExceeded"] = {"required": str(exc.required), "cap": str(exc.cap)}
            lines.append(f"cap exceeded: need {exc.required} vertices, cap {exc.cap}")
            _emit(args, payload, lines, config)
            return EXIT_BUDGET
        minimal = trees.prune_to_minimal(tree, params.k, params.d)
        cnf = formula.tree_to_cnf(minimal, params.k)
        plan_hash = hashlib.sha256(trees.plan_to_json(plan).encode()).hexdigest()[:16]
        comments = (
            f"width k={params.k} occurrence cap d={params.d} plan={plan_hash}",
            f"leaves={minimal.n_leaves} vars={cnf.n_vars} clauses={cnf.n_clauses}",
        )
        formula.emit_dimacs(cnf, args.emit_dimacs, comments)
        payload["dimacs"] = {
            "path": args.emit_dimacs,
            "nVars": cnf.n_vars,
            "nClauses": cnf.n_clauses,
        }
        lines.append(f"DIMACS written to {args.emit_dimacs} ({cnf.n_clauses} clauses)")
    _emit(args, payload, lines, config)
    return EXIT_OK


def cmd_find_min_d(args) -> int:
    config = {"command": "find-min-d", "k": args.k, "budget": args.budget}
    k = args.k
    hi = bounds.construction_d(k)
    lo = bounds.bks_occurrence_bound(k)  # no tree exists at or below this cap
    result = run_min_d_search(k, lo, hi, args.budget)
    if result is None:
        print(f"construction failed even at d={hi}", file=sys.stderr)
        return EXIT_VERIFY
    d_min, trace = result
    plan = trees.plan_from_trace(trace)
    e = bounds.e_enclosure(60)
    rlo = Fraction(d_min * k) * e.lower / (1 << (k + 1))
    rhi = Fraction(d_min * k) * e.upper / (1 << (k + 1))
    payload = {
        "k": k,
        "dMin": str(d_min),
        "ratioLower": f"{rlo.numerator}/{rlo.denominator}",
        "ratioUpper": f"{rhi.numerator}/{rhi.denominator}",
        "ratioDecimal": _ratio_decimal(d_min, k),
        "steps": len(trace.steps),
        "planDepth": str(plan.depth),
    }
    lines = [
        f"k = {k}",
        f"d_min = {d_min}",
        f"ratio d_min*e*k/2^(k+1) ~ {payload['ratioDecimal']}",
        f"steps = {len(trace.steps)}",
        f"plan depth = {plan.depth}",
    ]
    _emit(args, payload, lines, config)
    return EXIT_OK


def run_min_d_search(k: int, lo: int, hi: int, budget: int):
    """Binary search for the smallest d whose run reaches weight one.

    lo must be a failing cap and hi a succeeding one; returns (d_min,
    trace at d_min).  Raises BudgetExhaustedError if a probe cannot be
    classified within the step budget.
    """

    def probe(d: int):
        params = recursion.derive_params(k, d)
        trace = recursion.run(params, max_steps=budget)
        if trace.status is RunStatus.BUDGET_EXHAUSTED:
            raise BudgetExhaustedError(f"probe at d={d} undecided in {budget} steps")
        return trace

    top = probe(hi)
    if top.status is not RunStatus.REACHED_WEIGHT_ONE:
        return None
    best = (hi, top)
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        trace = probe(mid)
        if trace.status is RunStatus.REACHED_WEIGHT_ONE:
            hi, best = mid, (mid, trace)
        else:
            lo = mid
    return best


def cmd_bounds(args) -> int:
    ks = _parse_k_range(args.k)
    config = {"command": "bounds", "k": args.k}
    reports = [bounds.bounds_report(k) for k in ks]
    payload = {"bounds": [r.as_dict() for r in reports]}
    header = f"{'k':>5} {'lll_l':>12} {'kst_f':>12} {'bks_f':>12} {'construction_d':>16}"
    lines = [header]
    for r in reports:
        lines.append(
            f"{r.k:>5} {r.lll_l:>12} {r.kst_f:>12} {r.bks_f:>12} {r.construction_d:>16}"
        )
    _emit(args, payload, lines, config)
    return EXIT_OK


def cmd_search_f2(args) -> int:
    config = {
        "command": "search-f2",
        "k": args.k,
        "maxD": args.max_d,
        "budget": args.budget,
    }
    cached = None
    records = search.cache_load(args.cache) if args.cache and args.resume else []
    if records:
        for d in range(1, args.max_d + 1):
            rec = search.cache_lookup(records, args.k, d)
            if rec is None or not rec["exists"]:
                continue
            below = search.cache_lookup(records, args.k, d - 1)
            if below is not None and below["exists"] is False:
                cached = d - 1
                break
    if cached is not None:
        value = cached
    else:
        try:
            value = search.f2(args.k, d_max=args.max_d, budget=args.budget)
        except BudgetExhaustedError as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_BUDGET
        if args.cache:
            search.cache_append(
                args.cache,
                {"k": args.k, "d": value, "exists": False, "budgetUsed": args.budget},
            )
            search.cache_append(
                args.cache,
                {"k": args.k, "d": value + 1, "exists": True, "budgetUsed": args.budget},
            )
    payload = {"k": args.k, "f2": value}
    _emit(args, payload, [f"f2({args.k}) = {value}"], config)
    return EXIT_OK


def cmd_mintree(args) -> int:
    config = {
        "command": "mintree",
        "k": args.k,
        "d": str(args.d),
        "budget": args.budget,
    }
    if args.cache and args.resume:
        rec = search.cache_lookup(search.cache_load(args.cache), args.k, args.d)
        if rec is not None and rec.get("minSize") is not None:
            size = int(rec["minSize"])
            _emit(args, {"k": args.k, "d": args.d, "minSize": str(size)},
                  [f"f2({args.k},{args.d}) = {size}"], config)
            return EXIT_OK
    try:
        size = search.min_tree_size(args.k, args.d, budget=args.budget)
    except BudgetExhaustedError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_BUDGET
    if args.cache:
        search.cache_append(
            args.cache,
            {
                "k": args.k,
                "d": args.d,
                "exists": True,
                "minSize": size,
                "budgetUsed": args.budget,
            },
        )
    payload = {"k": args.k, "d": args.d, "minSize": str(size)}
    _emit(args, payload, [f"f2({args.k},{args.d}) = {size}"], config)
    return EXIT_OK


def cmd_verify(args) -> int:
    config = {"command": "verify", "k": args.k, "d": str(args.d), "file": args.file}
    cnf = formula.parse_dimacs(args.file)
    failures = []
    if cnf.k != args.k:
        failures.append(f"clause width {cnf.k} != declared {args.k}")
    # occurrence caps only: full neighborhood stats are quadratic on
    # formulas whose shallow variables appear in most clauses
    var_occ: dict[int, int] = {}
    lit_occ: dict[int, int] = {}
    for clause in cnf.clauses:
        for lit in clause:
            var_occ[abs(lit)] = var_occ.get(abs(lit), 0) + 1
            lit_occ[lit] = lit_occ.get(lit, 0) + 1
    max_var = max(var_occ.values(), default=0)
    max_lit = max(lit_occ.values(), default=0)
    if max_var > args.d:
        failures.append(f"max variable occurrences {max_var} exceed d={args.d}")
    unsat = mu = None
    if not args.skip_solve:
        try:
            unsat = satcheck.dpll_sat(cnf, node_limit=args.budget) is None
            if unsat:
                mu = satcheck.verify_mu(cnf, node_limit=args.budget)
            else:
                failures.append("formula is satisfiable")
        except BudgetExhaustedError:
            unsat = mu = None  # undecided within budget; structural checks stand
    payload = {
        "k": args.k,
        "d": str(args.d),
        "nVars": cnf.n_vars,
        "nClauses": cnf.n_clauses,
        "maxVarOcc": max_var,
        "maxLitOcc": max_lit,
        "unsat": unsat,
        "mu": mu,
        "failures": failures,
    }
    lines = [
        f"vars={cnf.n_vars} clauses={cnf.n_clauses}",
        f"maxVarOcc={max_var} maxLitOcc={max_lit}",
        f"unsat={unsat} mu={mu}",
    ]
    lines += [f"FAIL: {f}" for f in failures]
    if not failures:
        lines.append("OK")
    _emit(args, payload, lines, config)
    return EXIT_OK if not failures else EXIT_VERIFY


def cmd_solve(args) -> int:
    config = {
        "command": "solve",
        "method": args.method,
        "seed": args.seed,
        "file": args.file,
    }
    cnf = formula.parse_dimacs(args.file)
    if args.method == "dpll":
        try:
            assignment = satcheck.dpll_sat(cnf, node_limit=args.budget)
        except BudgetExhaustedError as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_BUDGET
    else:
        max_resamples = args.max_resamples or 10_000 * max(1, cnf.n_clauses)
        assignment, _used = satcheck.moser_tardos(cnf, args.seed, max_resamples)
        if assignment is None:
            print("c resampling gave up", file=sys.stderr)
            return EXIT_BUDGET
    for line in satcheck.solution_lines(assignment):
        print(line)
    _ = config
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treesat",
        description="extremal unsatisfiable formulas from binary trees",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("construct", help="run the doubling/splice construction")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--budget", type=int, default=100_000, help="max recursion steps")
    p.add_argument("--cap", type=int, default=trees.DEFAULT_VERTEX_CAP)
    p.add_argument("--emit-dimacs", metavar="PATH", default=None)
    p.add_argument("--plan-out", metavar="PATH", default=None)
    p.add_argument("--trace-out", metavar="PATH", default=None)
    add_common(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("find-min-d", help="binary search the smallest working cap")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--budget", type=int, default=100_000, help="max steps per probe")
    add_common(p)
    p.set_defaults(func=cmd_find_min_d)

    p = sub.add_parser("bounds", help="rigorous threshold table")
    p.add_argument("--k", required=True, help="single k or range a..b")
    add_common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("search-f2", help="exact threshold by antichain fixed point")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--max-d", type=int, default=64)
    p.add_argument("--budget", type=int, default=10**9)
    p.add_argument("--cache", default=None)
    p.add_argument("--resume", action="store_true")
    add_common(p)
    p.set_defaults(func=cmd_search_f2)

    p = sub.add_parser("mintree", help="exact minimal tree size")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--budget", type=int, default=10**9)
    p.add_argument("--cache", default=None)
    p.add_argument("--resume", action="store_true")
    add_common(p)
    p.set_defaults(func=cmd_mintree)

    p = sub.add_parser("verify", help="check a DIMACS file against declared (k,d)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--budget", type=int, default=satcheck.DEFAULT_NODE_LIMIT)
    p.add_argument("--skip-solve", action="store_true")
    p.add_argument("file")
    add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("solve", help="decide a DIMACS file")
    p.add_argument("--method", choices=("dpll", "moser-tardos"), default="dpll")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=satcheck.DEFAULT_NODE_LIMIT)
    p.add_argument("--max-resamples", type=int, default=None)
    p.add_argument("file")
    add_common(p)
    p.set_defaults(func=cmd_solve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, TreesatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
