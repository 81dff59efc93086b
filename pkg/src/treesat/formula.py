"""CNF formulas from binary trees, occurrence statistics, and DIMACS I/O.

Every internal tree vertex contributes one fresh variable shared by its
two children (plain literal on the first child, negated on the second);
every leaf contributes the clause of the k literals closest to it on its
root path.  The resulting formula is unsatisfiable with one more clause
than variables, and is minimally so exactly when every literal occurs.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Callable, Mapping, Union

from .errors import FormulaError, LeafTooShallowError
from .trees import LEAF, BinaryTree

Assignment = Union[Mapping[int, bool], Callable[[int], bool]]


@dataclass(frozen=True)
class CnfFormula:
    k: int
    n_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for c in self.clauses:
            if len(c) != self.k:
                raise FormulaError(f"clause {c} does not have width {self.k}")
            vs = {abs(lit) for lit in c}
            if 0 in vs or len(vs) != self.k:
                raise FormulaError(f"clause {c} must use {self.k} distinct variables")
            if any(abs(lit) > self.n_vars for lit in c):
                raise FormulaError(f"clause {c} references a variable above {self.n_vars}")

    @property
    def n_clauses(self) -> int:
        return len(self.clauses)


def _value(assignment: Assignment, var: int) -> bool:
    if callable(assignment):
        return bool(assignment(var))
    return bool(assignment[var])


def clause_satisfied(clause: tuple[int, ...], assignment: Assignment) -> bool:
    return any(_value(assignment, abs(lit)) == (lit > 0) for lit in clause)


def _bfs_variable_numbering(t: BinaryTree) -> dict[int, int]:
    """Internal vertex -> variable index, in breadth-first visit order."""
    var_of = {}
    queue = [t.root]
    head = 0
    nxt = 1
    while head < len(queue):
        v = queue[head]
        head += 1
        if t.first[v] == LEAF:
            continue
        var_of[v] = nxt
        nxt += 1
        queue.append(t.first[v])
        queue.append(t.second[v])
    return var_of


def tree_to_cnf(t: BinaryTree, k: int) -> CnfFormula:
    """One clause per leaf: the k nearest path literals, root-to-leaf order.

    Variables are numbered breadth-first over internal vertices; clauses
    appear in depth-first leaf order.  Requires no leaf within distance
    k-1 of the root.
    """
    var_of = _bfs_variable_numbering(t)
    clauses = []
    # iterative DFS carrying the literal path from the root
    path: list[int] = []
    stack: list[tuple[int, int]] = [(t.root, 0)]  # (vertex, literal or 0 for root)
    while stack:
        v, lit = stack.pop()
        if v == -2:  # path pop marker
            path.pop()
            continue
        if lit:
            path.append(lit)
            stack.append((-2, 0))
        if t.first[v] == LEAF:
            if len(path) < k:
                raise LeafTooShallowError(
                    f"leaf at distance {len(path)} < {k} from the root"
                )
            clauses.append(tuple(path[-k:]))
        else:
            var = var_of[v]
            stack.append((t.second[v], -var))
            stack.append((t.first[v], var))
    return CnfFormula(k=k, n_vars=len(var_of), clauses=tuple(clauses))


class TreeFormulaView:
    """Clause access for a tree formula without materializing the clauses.

    Precomputes the variable numbering, parent links and leaf ranks once,
    after which clause extraction and falsified-clause walks cost only the
    path length.  Intended for trees too large to hold every clause tuple.
    """

    def __init__(self, t: BinaryTree, k: int):
        self.tree = t
        self.k = k
        self.var_of = _bfs_variable_numbering(t)
        self.parent = [-1] * t.n_vertices
        self.is_second_child = [False] * t.n_vertices
        for v in range(t.n_vertices):
            if t.first[v] != LEAF:
                self.parent[t.first[v]] = v
                self.parent[t.second[v]] = v
                self.is_second_child[t.second[v]] = True
        self.leaves = t.leaves_preorder()
        self.rank_of_leaf = {leaf: i for i, leaf in enumerate(self.leaves)}

    @property
    def n_vars(self) -> int:
        return len(self.var_of)

    @property
    def n_clauses(self) -> int:
        return len(self.leaves)

    def clause_of_leaf(self, leaf: int) -> tuple[int, ...]:
        """The k literals nearest the leaf on its root path, root-to-leaf order."""
        lits = []
        v = leaf
        while len(lits) < self.k:
            p = self.parent[v]
            if p == -1:
                raise LeafTooShallowError(
                    f"leaf at distance {len(lits)} < {self.k} from the root"
                )
            var = self.var_of[p]
            lits.append(-var if self.is_second_child[v] else var)
            v = p
        lits.reverse()
        return tuple(lits)

    def clause(self, index: int) -> tuple[int, ...]:
        return self.clause_of_leaf(self.leaves[index])

    def falsified_clause(self, assignment: Assignment) -> int:
        """Index of a clause the assignment falsifies, found by a root walk.

        From each internal vertex descend into the child whose literal is
        false under the assignment; the reached leaf's clause consists of
        falsified literals only.
        """
        t = self.tree
        v = t.root
        while t.first[v] != LEAF:
            var = self.var_of[v]
            # first child carries +var: false when the variable is false
            v = t.second[v] if _value(assignment, var) else t.first[v]
        clause = self.clause_of_leaf(v)
        assert not clause_satisfied(clause, assignment)
        return self.rank_of_leaf[v]


def falsified_clause(t: BinaryTree, k: int, assignment: Assignment) -> int:
    """One-shot wrapper over TreeFormulaView.falsified_clause.

    The index refers to tree_to_cnf clause order (depth-first leaves).
    """
    return TreeFormulaView(t, k).falsified_clause(assignment)


def check_mu1_structure(t: BinaryTree, k: int, formula: CnfFormula) -> bool:
    """True iff the tree formula is minimally unsatisfiable.

    Every internal vertex other than the root must have a descendant leaf
    within distance k-1 (so both of its variable's literals occur), and
    the clause/variable counts must differ by one.
    """
    if formula.n_clauses != formula.n_vars + 1:
        return False
    mind = t.min_leaf_depths()
    for v in range(t.n_vertices):
        if v == t.root or t.first[v] == LEAF:
            continue
        if mind[v] > k - 1:
            return False
    return True


def opposite_sign_intersection(formula: CnfFormula) -> bool:
    """True iff every variable-sharing clause pair shares a variable with opposite signs."""
    sign_maps = [dict((abs(lit), lit > 0) for lit in c) for c in formula.clauses]
    by_var: dict[int, list[int]] = {}
    for ci, c in enumerate(formula.clauses):
        for lit in c:
            by_var.setdefault(abs(lit), []).append(ci)
    seen: set[tuple[int, int]] = set()
    for occurrences in by_var.values():
        for i in range(len(occurrences)):
            for jj in range(i + 1, len(occurrences)):
                a, b = occurrences[i], occurrences[jj]
                if (a, b) in seen:
                    continue
                seen.add((a, b))
                sa, sb = sign_maps[a], sign_maps[b]
                if not any(v in sb and sb[v] != pos for v, pos in sa.items()):
                    return False
    return True


@dataclass(frozen=True)
class FormulaStats:
    n_vars: int
    n_clauses: int
    max_var_occurrences: int
    max_literal_occurrences: int
    max_neighborhood: int

    def as_dict(self, k: int) -> dict:
        return {
            "k": k,
            "nVars": self.n_vars,
            "nClauses": self.n_clauses,
            "maxVarOcc": self.max_var_occurrences,
            "maxLitOcc": self.max_literal_occurrences,
            "maxNeighborhood": self.max_neighborhood,
        }


def stats(formula: CnfFormula) -> FormulaStats:
    """Exact occurrence and clause-neighborhood counts by full scan."""
    var_occ: dict[int, int] = {}
    lit_occ: dict[int, int] = {}
    by_var: dict[int, list[int]] = {}
    for ci, c in enumerate(formula.clauses):
        for lit in c:
            v = abs(lit)
            var_occ[v] = var_occ.get(v, 0) + 1
            lit_occ[lit] = lit_occ.get(lit, 0) + 1
            by_var.setdefault(v, []).append(ci)
    max_nbhd = 0
    stamp = [-1] * formula.n_clauses
    for ci, c in enumerate(formula.clauses):
        count = 0
        for lit in c:
            for other in by_var[abs(lit)]:
                if other != ci and stamp[other] != ci:
                    stamp[other] = ci
                    count += 1
        max_nbhd = max(max_nbhd, count)
    return FormulaStats(
        n_vars=formula.n_vars,
        n_clauses=formula.n_clauses,
        max_var_occurrences=max(var_occ.values(), default=0),
        max_literal_occurrences=max(lit_occ.values(), default=0),
        max_neighborhood=max_nbhd,
    )


# ---------------------------------------------------------------------------
# DIMACS


def emit_dimacs(formula: CnfFormula, destination, comments: tuple[str, ...] = ()) -> None:
    """Write standard DIMACS CNF with LF newlines, byte-stable across platforms."""
    own = isinstance(destination, (str, bytes))
    handle = (
        open(destination, "w", encoding="ascii", newline="\n") if own else destination
    )
    try:
        for comment in comments:
            handle.write(f"c {comment}\n")
        handle.write(f"p cnf {formula.n_vars} {formula.n_clauses}\n")
        for clause in formula.clauses:
            handle.write(" ".join(str(lit) for lit in clause) + " 0\n")
    finally:
        if own:
            handle.close()


def dimacs_bytes(formula: CnfFormula, comments: tuple[str, ...] = ()) -> bytes:
    buf = io.StringIO()
    emit_dimacs(formula, buf, comments)
    return buf.getvalue().encode("ascii")


def parse_dimacs(source) -> CnfFormula:
    """Parse DIMACS CNF with uniform clause width into a CnfFormula."""
    own = isinstance(source, (str, bytes))
    handle = open(source, "r", encoding="ascii") if own else source
    try:
        n_vars = n_clauses = None
        clauses: list[tuple[int, ...]] = []
        current: list[int] = []
        for line in handle:
            line = line.strip()
            if not line or line.startswith("c") or line.startswith("%"):
                continue
            if line.startswith("p"):
                parts = line.split()
                if len(parts) != 4 or parts[1] != "cnf":
                    raise FormulaError(f"bad problem line: {line!r}")
                n_vars, n_clauses = int(parts[2]), int(parts[3])
                continue
            for tok in line.split():
                lit = int(tok)
                if lit == 0:
                    clauses.append(tuple(current))
                    current = []
                else:
                    current.append(lit)
        if current:
            raise FormulaError("trailing clause without terminating 0")
        if n_vars is None:
            raise FormulaError("missing problem line")
        if n_clauses != len(clauses):
            raise FormulaError(f"expected {n_clauses} clauses, found {len(clauses)}")
        widths = {len(c) for c in clauses}
        if len(widths) != 1:
            raise FormulaError(f"clause widths are not uniform: {sorted(widths)}")
        return CnfFormula(k=widths.pop(), n_vars=n_vars, clauses=tuple(clauses))
    finally:
        if own:
            handle.close()
