"""Desk-scale satisfiability ground truth.

A complete DPLL decision procedure (unit propagation, pure literals,
most-frequent-variable branching), minimal-unsatisfiability verification
by clause deletion, and the resampling algorithm that finds satisfying
assignments below the occurrence threshold.  Correctness oracle only; no
attempt at competitive performance.
"""

from __future__ import annotations

import random
from typing import Optional

from .errors import BudgetExhaustedError, FormulaError
from .formula import CnfFormula, clause_satisfied

DEFAULT_NODE_LIMIT = 2_000_000


def _simplify(clauses: list[tuple[int, ...]], lit: int) -> Optional[list]:
    """Assign lit true: drop satisfied clauses, shorten falsified literals.

    Returns None on an empty clause (conflict).
    """
    out = []
    for c in clauses:
        if lit in c:
            continue
        if -lit in c:
            reduced = tuple(x for x in c if x != -lit)
            if not reduced:
                return None
            out.append(reduced)
        else:
            out.append(c)
    return out


def dpll_sat(
    formula: CnfFormula, node_limit: int = DEFAULT_NODE_LIMIT
) -> Optional[dict[int, bool]]:
    """Complete decision: a verified total assignment, or None for UNSAT.

    Branches on the most frequent variable, true first.  Raises
    BudgetExhaustedError when the decision-node limit is hit, which is
    distinct from an UNSAT answer.
    """
    nodes = [0]

    def solve(clauses, assignment):
        while True:
            # unit propagation
            unit = next((c[0] for c in clauses if len(c) == 1), None)
            if unit is not None:
                clauses = _simplify(clauses, unit)
                if clauses is None:
                    return None
                assignment[abs(unit)] = unit > 0
                continue
            # pure literal elimination
            lits = {lit for c in clauses for lit in c}
            pure = next((lit for lit in lits if -lit not in lits), None)
            if pure is not None:
                clauses = _simplify(clauses, pure)
                assert clauses is not None
                assignment[abs(pure)] = pure > 0
                continue
            break
        if not clauses:
            return assignment
        nodes[0] += 1
        if nodes[0] > node_limit:
            raise BudgetExhaustedError(f"DPLL node limit {node_limit} reached")
        counts: dict[int, int] = {}
        for c in clauses:
            for lit in c:
                counts[abs(lit)] = counts.get(abs(lit), 0) + 1
        var = max(counts, key=lambda v: (counts[v], -v))
        for value in (True, False):
            lit = var if value else -var
            reduced = _simplify(clauses, lit)
            if reduced is None:
                continue
            branched = dict(assignment)
            branched[var] = value
            result = solve(reduced, branched)
            if result is not None:
                return result
        return None

    partial = solve(list(formula.clauses), {})
    if partial is None:
        return None
    full = {v: partial.get(v, True) for v in range(1, formula.n_vars + 1)}
    assert all(clause_satisfied(c, full) for c in formula.clauses)
    return full


def verify_mu(formula: CnfFormula, node_limit: int = DEFAULT_NODE_LIMIT) -> bool:
    """Minimal unsatisfiability: UNSAT, and deleting any one clause gives SAT."""
    if dpll_sat(formula, node_limit) is not None:
        return False
    for i in range(formula.n_clauses):
        reduced = CnfFormula(
            k=formula.k,
            n_vars=formula.n_vars,
            clauses=formula.clauses[:i] + formula.clauses[i + 1 :],
        )
        if dpll_sat(reduced, node_limit) is None:
            return False
    return True


def moser_tardos(
    formula: CnfFormula, seed: int, max_resamples: int
) -> tuple[Optional[dict[int, bool]], int]:
    """Resample the lowest-index violated clause until none remains.

    Starts from a uniformly random total assignment drawn from the seed;
    returns (assignment, resamples) on success or (None, max_resamples)
    when the budget runs out.  A returned assignment is always verified.
    """
    rng = random.Random(seed)
    assignment = {v: rng.random() < 0.5 for v in range(1, formula.n_vars + 1)}
    for used in range(max_resamples + 1):
        violated = next(
            (c for c in formula.clauses if not clause_satisfied(c, assignment)), None
        )
        if violated is None:
            assert all(clause_satisfied(c, assignment) for c in formula.clauses)
            return assignment, used
        if used == max_resamples:
            break
        for lit in violated:
            assignment[abs(lit)] = rng.random() < 0.5
    return None, max_resamples


def random_ks_cnf(
    k: int, s: int, n_vars: int, n_clauses: int, rng: random.Random
) -> CnfFormula:
    """Random width-k formula with every variable in at most s clauses.

    Test plumbing: clauses are sampled uniformly over k-subsets of the
    variables still below the occurrence cap, with fresh random signs.
    """
    if n_vars < k:
        raise FormulaError(f"need at least {k} variables, got {n_vars}")
    if n_clauses * k > n_vars * s:
        raise FormulaError("occurrence cap leaves too few slots for that many clauses")
    occ = {v: 0 for v in range(1, n_vars + 1)}
    clauses = []
    for _ in range(n_clauses):
        available = [v for v, c in occ.items() if c < s]
        if len(available) < k:
            raise FormulaError("occurrence cap exhausted mid-generation")
        chosen = rng.sample(available, k)
        for v in chosen:
            occ[v] += 1
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in chosen))
    return CnfFormula(k=k, n_vars=n_vars, clauses=tuple(clauses))


def solution_lines(assignment: Optional[dict[int, bool]]) -> list[str]:
    """Solver-convention output: status line plus v-lines for SAT."""
    if assignment is None:
        return ["s UNSATISFIABLE"]
    lits = [v if assignment[v] else -v for v in sorted(assignment)]
    lines = ["s SATISFIABLE"]
    chunk = 20
    for i in range(0, len(lits), chunk):
        lines.append("v " + " ".join(str(x) for x in lits[i : i + chunk]))
    lines[-1] += " 0" if lits else ""
    if not lits:
        lines.append("v 0")
    return lines
