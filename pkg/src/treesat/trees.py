"""Binary trees and shared-substructure build plans.

Trees are stored as flat child arrays (index -1 marks a leaf child slot),
which keeps million-vertex materializations cheap and all traversals
iterative.  A BuildPlan describes a tree as a DAG of Kraft-leaf, doubling
and splice nodes with exact big-integer leaf counts and depths, so the
astronomically large trees the recursion produces can be accounted for
without ever materializing them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Union

from .errors import (
    CapExceededError,
    InvalidTraceError,
    NotAKdTreeError,
    WeightNotOneError,
)
from .recursion import RecursionTrace, RunStatus
from .vectors import KdVector, op_C_star, trim_to_weight_one, weight_scaled

LEAF = -1

DEFAULT_VERTEX_CAP = 10**7


class BinaryTree:
    """Full binary tree over a flat vertex arena."""

    __slots__ = ("first", "second", "root")

    def __init__(self):
        self.first: list[int] = []
        self.second: list[int] = []
        self.root: int = 0

    def add_leaf(self) -> int:
        self.first.append(LEAF)
        self.second.append(LEAF)
        return len(self.first) - 1

    def add_internal(self, a: int, b: int) -> int:
        self.first.append(a)
        self.second.append(b)
        return len(self.first) - 1

    def is_leaf(self, v: int) -> bool:
        return self.first[v] == LEAF

    @property
    def n_vertices(self) -> int:
        return len(self.first)

    @property
    def n_leaves(self) -> int:
        return sum(1 for c in self.first if c == LEAF)

    def depth(self) -> int:
        """Largest root-leaf distance."""
        best = 0
        stack = [(self.root, 0)]
        while stack:
            v, dep = stack.pop()
            if self.first[v] == LEAF:
                best = max(best, dep)
            else:
                stack.append((self.first[v], dep + 1))
                stack.append((self.second[v], dep + 1))
        return best

    def leaves_preorder(self) -> list[int]:
        """Leaf vertex ids in depth-first (first child before second) order."""
        out = []
        stack = [self.root]
        while stack:
            v = stack.pop()
            if self.first[v] == LEAF:
                out.append(v)
            else:
                stack.append(self.second[v])
                stack.append(self.first[v])
        return out

    def postorder(self) -> list[int]:
        """Vertex ids with every vertex after both of its children."""
        out = []
        stack = [(self.root, False)]
        while stack:
            v, expanded = stack.pop()
            if expanded or self.first[v] == LEAF:
                out.append(v)
            else:
                stack.append((v, True))
                stack.append((self.second[v], False))
                stack.append((self.first[v], False))
        return out

    def min_leaf_depths(self) -> list[int]:
        """Per vertex: distance to the nearest descendant leaf (0 for leaves)."""
        mind = [0] * self.n_vertices
        for v in self.postorder():
            if self.first[v] != LEAF:
                mind[v] = 1 + min(mind[self.first[v]], mind[self.second[v]])
        return mind

    def extract_subtree(self, v: int) -> "BinaryTree":
        out = BinaryTree()
        remap = {}
        for u in self._subtree_postorder(v):
            if self.first[u] == LEAF:
                remap[u] = out.add_leaf()
            else:
                remap[u] = out.add_internal(remap[self.first[u]], remap[self.second[u]])
        out.root = remap[v]
        return out

    def _subtree_postorder(self, v: int) -> list[int]:
        out = []
        stack = [(v, False)]
        while stack:
            u, expanded = stack.pop()
            if expanded or self.first[u] == LEAF:
                out.append(u)
            else:
                stack.append((u, True))
                stack.append((self.second[u], False))
                stack.append((self.first[u], False))
        return out

    @staticmethod
    def complete(depth: int) -> "BinaryTree":
        t = BinaryTree()

        def build(dep):
            if dep == 0:
                return t.add_leaf()
            return t.add_internal(build(dep - 1), build(dep - 1))

        t.root = build(depth)
        return t

    @staticmethod
    def join(a: "BinaryTree", b: "BinaryTree") -> "BinaryTree":
        """New tree whose root's subtrees are copies of a and b."""
        t = BinaryTree()
        ra = _copy_into(a, a.root, t)
        rb = _copy_into(b, b.root, t)
        t.root = t.add_internal(ra, rb)
        return t


def _copy_into(src: BinaryTree, v: int, dst: BinaryTree) -> int:
    remap = {}
    for u in src._subtree_postorder(v):
        if src.first[u] == LEAF:
            remap[u] = dst.add_leaf()
        else:
            remap[u] = dst.add_internal(remap[src.first[u]], remap[src.second[u]])
    return remap[v]


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    violation: Optional[str] = None

    def __bool__(self) -> bool:
        return self.ok


def _window_profiles(t: BinaryTree, k: int, d: int):
    """Bottom-up leaf-distance profiles, checking the occurrence cap.

    Yields the root's (k+1)-profile or a ValidationResult failure.  Child
    profiles are freed as soon as the parent consumes them, so the peak
    memory is proportional to the tree depth, not its size.
    """
    profiles: dict[int, list[int]] = {}
    for v in t.postorder():
        if t.first[v] == LEAF:
            prof = [0] * (k + 1)
            prof[0] = 1
        else:
            a = profiles.pop(t.first[v])
            b = profiles.pop(t.second[v])
            prof = [0] * (k + 1)
            for j in range(1, k + 1):
                prof[j] = a[j - 1] + b[j - 1]
        if sum(prof) > d:
            return None, ValidationResult(
                False, f"vertex {v} has {sum(prof)} leaves within distance {k} (cap {d})"
            )
        profiles[v] = prof
    return profiles[t.root], None


def validate_kd_tree(t: BinaryTree, k: int, d: int) -> ValidationResult:
    """Check: no leaf within distance k-1 of the root, occurrence cap d everywhere."""
    root_prof, failure = _window_profiles(t, k, d)
    if failure is not None:
        return failure
    for j in range(k):
        if root_prof[j] > 0:
            return ValidationResult(False, f"leaf at distance {j} < {k} from root")
    return ValidationResult(True)


def validate_kdx_tree(t: BinaryTree, k: int, d: int, x: KdVector) -> ValidationResult:
    """Check: root leaf profile capped by x entrywise, occurrence cap d everywhere."""
    root_prof, failure = _window_profiles(t, k, d)
    if failure is not None:
        return failure
    for j in range(k + 1):
        if root_prof[j] > x.entries[j]:
            return ValidationResult(
                False, f"{root_prof[j]} leaves at distance {j}, profile allows {x.entries[j]}"
            )
    return ValidationResult(True)


def kraft_tree(y: KdVector) -> BinaryTree:
    """Canonical depth-<=k tree with exactly y_j leaves at every depth j.

    Slots are expanded breadth-first, taking the required leaves leftmost
    at each depth; weight exactly one guarantees the frontier is consumed
    precisely at depth k.  Same vector, same tree, on every platform.
    """
    if weight_scaled(y) != 1 << y.k:
        raise WeightNotOneError(f"profile weight must be exactly 1, scaled {weight_scaled(y)}")
    t = BinaryTree()
    t.first.append(LEAF)
    t.second.append(LEAF)
    t.root = 0
    slots = [0]
    for j in range(y.k + 1):
        need = y.entries[j]
        assert need <= len(slots)
        for v in slots[:need]:
            t.first[v] = LEAF
            t.second[v] = LEAF
        nxt = []
        for v in slots[need:]:
            t.first.append(LEAF)
            t.second.append(LEAF)
            a = len(t.first) - 1
            t.first.append(LEAF)
            t.second.append(LEAF)
            b = len(t.first) - 1
            t.first[v] = a
            t.second[v] = b
            nxt.append(a)
            nxt.append(b)
        slots = nxt
        if not slots:
            break
    assert not slots
    return t


def prune_to_minimal(t: BinaryTree, k: int, d: int) -> BinaryTree:
    """Deepest-first descent to a subtree no proper part of which still qualifies.

    A subtree rooted at v qualifies when v's nearest descendant leaf is at
    distance >= k (the cap condition is inherited).  The corresponding
    formula is minimally unsatisfiable exactly when no qualifying vertex
    remains below the chosen root.
    """
    res = validate_kd_tree(t, k, d)
    if not res:
        raise NotAKdTreeError(res.violation)
    mind = t.min_leaf_depths()
    qualifies = [
        t.first[v] != LEAF and mind[v] >= k for v in range(t.n_vertices)
    ]
    has_q = list(qualifies)
    for v in t.postorder():
        if t.first[v] != LEAF:
            has_q[v] = qualifies[v] or has_q[t.first[v]] or has_q[t.second[v]]
    v = t.root
    while True:
        a, b = t.first[v], t.second[v]
        if a != LEAF and has_q[a]:
            v = a
        elif b != LEAF and has_q[b]:
            v = b
        else:
            break
    assert qualifies[v]
    return t.extract_subtree(v)


# ---------------------------------------------------------------------------
# build plans


@dataclass(frozen=True)
class KraftLeafNode:
    profile: tuple[int, ...]  # weight exactly 1


@dataclass(frozen=True)
class DoubleNode:
    child: int


@dataclass(frozen=True)
class SpliceNode:
    l: int
    main: int
    star: int
    r: int


PlanNode = Union[KraftLeafNode, DoubleNode, SpliceNode]


@dataclass(frozen=True)
class BuildPlan:
    k: int
    d: int
    nodes: tuple[PlanNode, ...]
    root: int
    leaf_counts: tuple[int, ...]
    depths: tuple[int, ...]

    @property
    def leaf_count(self) -> int:
        return self.leaf_counts[self.root]

    @property
    def depth(self) -> int:
        return self.depths[self.root]

    def validate(self) -> ValidationResult:
        """Recompute the accounting and check every structural invariant."""
        if not 0 <= self.root < len(self.nodes):
            return ValidationResult(False, "root id out of range")
        for i, node in enumerate(self.nodes):
            if isinstance(node, KraftLeafNode):
                if len(node.profile) != self.k + 1:
                    return ValidationResult(False, f"node {i}: profile length")
                if any(e < 0 for e in node.profile):
                    return ValidationResult(False, f"node {i}: negative profile entry")
                if sum(node.profile) > self.d:
                    return ValidationResult(False, f"node {i}: profile exceeds cap")
                w = 0
                for e in node.profile:
                    w = (w << 1) + e
                if w != 1 << self.k:
                    return ValidationResult(False, f"node {i}: profile weight not 1")
                lc = sum(node.profile)
                dep = max(j for j, e in enumerate(node.profile) if e > 0)
            elif isinstance(node, DoubleNode):
                if not 0 <= node.child < i:
                    return ValidationResult(False, f"node {i}: child id not earlier")
                lc = 2 * self.leaf_counts[node.child]
                dep = self.depths[node.child] + 1
            elif isinstance(node, SpliceNode):
                if not (0 <= node.main < i and 0 <= node.star < i):
                    return ValidationResult(False, f"node {i}: child id not earlier")
                if node.l < 1 or not node.l <= node.r <= self.k:
                    return ValidationResult(False, f"node {i}: bad splice parameters")
                lc = (2**node.l - 1) * self.leaf_counts[node.main] + self.leaf_counts[
                    node.star
                ]
                dep = node.l + max(self.depths[node.main], self.depths[node.star])
            else:
                return ValidationResult(False, f"node {i}: unknown kind")
            if lc != self.leaf_counts[i] or dep != self.depths[i]:
                return ValidationResult(False, f"node {i}: stored accounting wrong")
        return ValidationResult(True)


class PlanBuilder:
    """Hash-consing builder: structurally equal subplans share one node id."""

    def __init__(self, k: int, d: int):
        self.k = k
        self.d = d
        self._nodes: list[PlanNode] = []
        self._index: dict = {}
        self._leaf_counts: list[int] = []
        self._depths: list[int] = []

    def _intern(self, key, node: PlanNode, lc: int, dep: int) -> int:
        found = self._index.get(key)
        if found is not None:
            return found
        self._nodes.append(node)
        self._leaf_counts.append(lc)
        self._depths.append(dep)
        nid = len(self._nodes) - 1
        self._index[key] = nid
        return nid

    def kraft(self, y: KdVector) -> int:
        if weight_scaled(y) != 1 << self.k:
            raise WeightNotOneError("plan leaves must have weight exactly 1")
        dep = max(j for j, e in enumerate(y.entries) if e > 0)
        return self._intern(
            ("K", y.entries), KraftLeafNode(y.entries), y.total(), dep
        )

    def double(self, child: int) -> int:
        return self._intern(
            ("D", child),
            DoubleNode(child),
            2 * self._leaf_counts[child],
            self._depths[child] + 1,
        )

    def splice(self, l: int, main: int, star: int, r: int) -> int:
        lc = (2**l - 1) * self._leaf_counts[main] + self._leaf_counts[star]
        dep = l + max(self._depths[main], self._depths[star])
        return self._intern(
            ("S", l, main, star, r), SpliceNode(l, main, star, r), lc, dep
        )

    def build(self, root: int) -> BuildPlan:
        return BuildPlan(
            k=self.k,
            d=self.d,
            nodes=tuple(self._nodes),
            root=root,
            leaf_counts=tuple(self._leaf_counts),
            depths=tuple(self._depths),
        )


def plan_from_trace(trace: RecursionTrace) -> BuildPlan:
    """Invert a successful recursion trace into a tree plan.

    The terminal vector becomes a Kraft leaf; each recorded step wraps the
    running plan in its doubling chain and a splice whose star child is
    the Kraft realization of the splice remainder; a final doubling chain
    accounts for the initial shifts from the zero vector.
    """
    if trace.status is not RunStatus.REACHED_WEIGHT_ONE:
        raise InvalidTraceError(f"cannot build from status {trace.status.value}")
    p = trace.params
    op = p.op
    b = PlanBuilder(p.k, p.d)
    node = b.kraft(trim_to_weight_one(trace.steps[-1].vector))
    for st in reversed(trace.steps[:-1]):
        if st.r is None:
            raise InvalidTraceError("intermediate step lacks a splice index")
        star_vec = op_C_star(st.vector, st.r, op)
        if star_vec.total() << op.l >= p.d:
            raise InvalidTraceError(f"splice remainder too large at r={st.r}")
        star = b.kraft(trim_to_weight_one(star_vec))
        for _ in range(st.r - op.s - op.l):
            node = b.double(node)
        node = b.splice(op.l, node, star, st.r)
    for _ in range(p.k - op.s):
        node = b.double(node)
    return b.build(node)


def materialize(plan: BuildPlan, cap_vertices: int = DEFAULT_VERTEX_CAP) -> BinaryTree:
    """Expand a plan into an explicit tree.

    Shared plan nodes expand to structurally identical but distinct
    subtrees; the splice scaffold puts the star child at the all-second
    path of its depth-l block.
    """
    required = 2 * plan.leaf_count - 1
    if required > cap_vertices:
        raise CapExceededError(required, cap_vertices)
    t = BinaryTree()

    def expand(nid: int) -> int:
        node = plan.nodes[nid]
        if isinstance(node, KraftLeafNode):
            return _expand_kraft(t, plan.k, node.profile)
        if isinstance(node, DoubleNode):
            a = expand(node.child)
            b = expand(node.child)
            return t.add_internal(a, b)
        scaffold = [expand(node.main) for _ in range(2**node.l - 1)]
        scaffold.append(expand(node.star))
        for _ in range(node.l):
            scaffold = [
                t.add_internal(scaffold[i], scaffold[i + 1])
                for i in range(0, len(scaffold), 2)
            ]
        return scaffold[0]

    t.root = expand(plan.root)
    return t


def _expand_kraft(t: BinaryTree, k: int, profile: tuple[int, ...]) -> int:
    t.first.append(LEAF)
    t.second.append(LEAF)
    root = len(t.first) - 1
    slots = [root]
    for j in range(k + 1):
        need = profile[j]
        nxt = []
        for v in slots[need:]:
            t.first.append(LEAF)
            t.second.append(LEAF)
            a = len(t.first) - 1
            t.first.append(LEAF)
            t.second.append(LEAF)
            b = len(t.first) - 1
            t.first[v] = a
            t.second[v] = b
            nxt.append(a)
            nxt.append(b)
        slots = nxt
        if not slots:
            break
    assert not slots
    return root


# ---------------------------------------------------------------------------
# plan serialization


def plan_to_dict(plan: BuildPlan) -> dict:
    nodes = []
    for i, node in enumerate(plan.nodes):
        if isinstance(node, KraftLeafNode):
            nodes.append(
                {"id": i, "kind": "kraft", "profile": [str(e) for e in node.profile]}
            )
        elif isinstance(node, DoubleNode):
            nodes.append({"id": i, "kind": "double", "child": node.child})
        else:
            nodes.append(
                {
                    "id": i,
                    "kind": "splice",
                    "l": node.l,
                    "main": node.main,
                    "star": node.star,
                    "r": node.r,
                }
            )
    return {
        "version": 1,
        "k": plan.k,
        "d": str(plan.d),
        "root": plan.root,
        "leafCount": str(plan.leaf_count),
        "depth": str(plan.depth),
        "nodes": nodes,
    }


def plan_to_json(plan: BuildPlan) -> str:
    return json.dumps(plan_to_dict(plan), sort_keys=True, separators=(",", ":"))


def plan_from_dict(data: dict) -> BuildPlan:
    k, d = int(data["k"]), int(data["d"])
    b = PlanBuilder(k, d)
    ids = {}
    for item in sorted(data["nodes"], key=lambda n: n["id"]):
        kind = item["kind"]
        if kind == "kraft":
            y = KdVector(k, d, tuple(int(e) for e in item["profile"]))
            nid = b.kraft(y)
        elif kind == "double":
            nid = b.double(ids[item["child"]])
        elif kind == "splice":
            nid = b.splice(item["l"], ids[item["main"]], ids[item["star"]], item["r"])
        else:
            raise ValueError(f"unknown plan node kind {kind!r}")
        ids[item["id"]] = nid
    plan = b.build(ids[data["root"]])
    if str(plan.leaf_count) != data["leafCount"] or str(plan.depth) != data["depth"]:
        raise ValueError("plan accounting disagrees with serialized values")
    return plan


def plan_from_json(text: str) -> BuildPlan:
    return plan_from_dict(json.loads(text))
