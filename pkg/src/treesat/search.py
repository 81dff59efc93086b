"""Exact extremal values by antichain fixed points over constructible vectors.

A cap vector is constructible when some valid tree's root leaf-profile
fits under it.  The set of constructible vectors is upward closed, so it
is represented by its antichain of dominance-minimal elements: weight-1
vectors seed it (depth-<=k trees), and joining two subtrees under a new
root adds the shifted entrywise sum.  The fixed point decides tree
existence exactly; a Pareto search over (profile, size) pairs computes
exact minimal tree sizes; an independent leaf-count enumeration serves
as the cross-check oracle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from heapq import heappop, heappush
from typing import Optional

import numpy as np

from .errors import BudgetExhaustedError
from .trees import BinaryTree, kraft_tree
from .vectors import KdVector

CACHE_VERSION = 1

_DOM_CHUNK = 2048


def weight_one_vectors(k: int, d: int) -> list[tuple[int, ...]]:
    """All vectors of weight exactly 1 with at most d entries, lex order.

    These are the leaf-depth profiles of full binary trees of depth <= k,
    and precisely the dominance-minimal vectors of weight >= 1.
    """
    out: list[tuple[int, ...]] = []
    entries = [0] * (k + 1)

    def descend(j: int, remaining: int, count_left: int):
        unit = 1 << (k - j)
        if j == k:
            if remaining <= count_left:
                entries[j] = remaining
                out.append(tuple(entries))
                entries[j] = 0
            return
        top = min(remaining // unit, count_left)
        for take in range(top + 1):
            entries[j] = take
            descend(j + 1, remaining - take * unit, count_left - take)
        entries[j] = 0

    descend(0, 1 << k, d)
    return out


def _dominated_mask(chain: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """candidates[i] is dominated when some chain row is <= it entrywise."""
    out = np.zeros(len(candidates), dtype=bool)
    if len(chain) == 0 or len(candidates) == 0:
        return out
    for lo in range(0, len(candidates), _DOM_CHUNK):
        block = candidates[lo : lo + _DOM_CHUNK]
        hits = np.zeros(len(block), dtype=bool)
        for clo in range(0, len(chain), 8192):
            cb = chain[clo : clo + 8192]
            hits |= (cb[None, :, :] <= block[:, None, :]).all(axis=2).any(axis=1)
            if hits.all():
                break
        out[lo : lo + _DOM_CHUNK] = hits
    return out


def _minimize_rows(rows: np.ndarray) -> np.ndarray:
    """Dominance-minimal rows, scanned smallest entry-sum first.

    A dominating row has entry sum <= the dominated one (with equality
    only for identical rows), so one pass over the sum-sorted rows against
    the kept prefix is exact.
    """
    if len(rows) == 0:
        return rows
    order = np.argsort(rows.sum(axis=1), kind="stable")
    kept = np.empty_like(rows)
    n_kept = 0
    chosen = np.zeros(len(rows), dtype=bool)
    for i in order:
        row = rows[i]
        if n_kept and (kept[:n_kept] <= row).all(axis=1).any():
            continue
        kept[n_kept] = row
        n_kept += 1
        chosen[i] = True
    return rows[chosen]


@dataclass
class Antichain:
    """Dominance-minimal constructible vectors for one (k, d)."""

    k: int
    d: int
    elements: tuple[tuple[int, ...], ...]
    at_fixed_point: bool
    budget_used: int
    derivations: Optional[dict] = field(default=None, repr=False)

    def as_array(self) -> np.ndarray:
        return np.array(self.elements, dtype=np.int32).reshape(-1, self.k + 1)


def is_constructible(x: KdVector, chain: Antichain) -> bool:
    """True iff x dominates some antichain element."""
    assert x.k == chain.k and x.d == chain.d
    target = np.array(x.entries, dtype=np.int32)
    arr = chain.as_array()
    if len(arr) == 0:
        return False
    return bool((arr <= target[None, :]).all(axis=1).any())


def constructible_fixpoint(
    k: int,
    d: int,
    budget: int = 10**9,
    witnesses: Optional[bool] = None,
) -> Antichain:
    """Least fixed point of the Kraft base and root-join combination rule.

    Processed in rounds: every new minimal element is combined with the
    whole current chain, results are deduplicated, dominance-pruned and
    batch-inserted.  The result is independent of chunking because all
    arrays are kept in lexicographic order.  Budget counts combination
    applications; on exhaustion the partial antichain is returned with
    at_fixed_point=False (its elements are still all constructible).
    """
    if witnesses is None:
        witnesses = k <= 5
    base = weight_one_vectors(k, d)
    chain = np.array(base, dtype=np.int32).reshape(-1, k + 1)
    derivations: Optional[dict] = (
        {tuple(map(int, row)): ("kraft",) for row in chain} if witnesses else None
    )
    frontier = chain
    used = 0
    exhausted = False
    f_chunk, c_chunk = 256, 4096
    while len(frontier) > 0:
        pairs = len(frontier) * len(chain)
        if used + pairs > budget:
            exhausted = True
            break
        used += pairs
        # all root-joins of a frontier element with any chain element,
        # processed in blocks; survivors keep their first generating pair
        round_new: dict[tuple[int, ...], tuple] = {}
        for flo in range(0, len(frontier), f_chunk):
            fb = frontier[flo : flo + f_chunk]
            for clo in range(0, len(chain), c_chunk):
                cb = chain[clo : clo + c_chunk]
                sums = fb[:, None, :-1] + cb[None, :, :-1]
                cands = np.zeros((len(fb) * len(cb), k + 1), dtype=np.int32)
                cands[:, 1:] = sums.reshape(-1, k)
                ok = cands.sum(axis=1) <= d
                flat_ids = np.nonzero(ok)[0]
                cands = cands[ok]
                if len(cands) == 0:
                    continue
                uniq, first_idx = np.unique(cands, axis=0, return_index=True)
                survivors = ~_dominated_mask(chain, uniq)
                srcs = flat_ids[first_idx[survivors]]
                for row, src in zip(uniq[survivors], srcs):
                    key = tuple(map(int, row))
                    if key not in round_new:
                        fi, ci = divmod(int(src), len(cb))
                        round_new[key] = (
                            "join",
                            tuple(map(int, fb[fi])),
                            tuple(map(int, cb[ci])),
                        )
        if not round_new:
            break
        rows = np.array(sorted(round_new), dtype=np.int32)
        fresh = _minimize_rows(rows)
        if derivations is not None:
            for row in fresh:
                key = tuple(map(int, row))
                derivations[key] = round_new[key]
        # drop chain elements superseded by strictly smaller newcomers
        superseded = _dominated_mask(fresh, chain)
        chain = np.concatenate([chain[~superseded], fresh])
        order = np.lexsort(chain.T[::-1])
        chain = chain[order]
        frontier = fresh
    elements = tuple(tuple(map(int, row)) for row in chain)
    return Antichain(
        k=k,
        d=d,
        elements=elements,
        at_fixed_point=not exhausted,
        budget_used=used,
        derivations=derivations,
    )


def witness_tree(chain: Antichain, element: tuple[int, ...]) -> BinaryTree:
    """Materialize a valid tree whose root profile is capped by the element."""
    if chain.derivations is None:
        raise ValueError("fixpoint was computed without witness derivations")
    memo: dict[tuple[int, ...], BinaryTree] = {}

    def build(vec: tuple[int, ...]) -> BinaryTree:
        got = memo.get(vec)
        if got is not None:
            return got
        deriv = chain.derivations[vec]
        if deriv[0] == "kraft":
            t = kraft_tree(KdVector(chain.k, chain.d, vec))
        else:
            t = BinaryTree.join(build(deriv[1]), build(deriv[2]))
        memo[vec] = t
        return t

    return build(tuple(element))


def kd_tree_target(k: int, d: int) -> KdVector:
    """The cap vector whose constructibility is exactly (k,d)-tree existence."""
    return KdVector(k, d, (0,) * k + (d,))


def f2(k: int, d_max: int = 64, budget: int = 10**9) -> int:
    """Largest d such that no (k,d)-tree exists, by an ascending scan.

    Tree existence is monotone in d, so the first d whose fixed point
    makes the all-deep target constructible settles the value.
    """
    for d in range(1, d_max + 1):
        chain = constructible_fixpoint(k, d, budget=budget, witnesses=False)
        if is_constructible(kd_tree_target(k, d), chain):
            return d - 1
        if not chain.at_fixed_point:
            raise BudgetExhaustedError(
                f"fixpoint for (k={k}, d={d}) incomplete; f2({k}) in [{d}, {d_max}]"
            )
    raise BudgetExhaustedError(f"no (k,d)-tree up to d={d_max}; f2({k}) >= {d_max}")


def min_tree_size(k: int, d: int, budget: int = 10**9) -> int:
    """Exact size of the smallest (k,d)-tree, for d above the threshold.

    Uniform-cost search over Pareto-optimal (profile, size) states: start
    from the single leaf, settle states in size order, join every settled
    pair.  The first settled profile with no leaf inside the depth-k
    window is the smallest (k,d)-tree.  Sizes are exact big integers.

    Profiles are packed into mixed-radix integer keys so the inner loop
    over join candidates stays cheap; radix d+1 keeps the packing
    injective for every valid entry.
    """
    key_dtype = np.int64 if (d + 1) ** (k + 1) < 2**63 else object
    radix_np = np.array([(d + 1) ** (k - j) for j in range(k + 1)], dtype=key_dtype)
    start_key = int((d + 1) ** k)  # the single leaf: entry 1 at position 0
    heap: list[tuple[int, int]] = [(1, start_key)]
    best: dict[int, int] = {start_key: 1}
    settled_sizes: list[int] = []
    settled_arr = np.zeros((0, k + 1), dtype=np.int32)
    used = 0

    def decode(key: int) -> np.ndarray:
        out = np.zeros(k + 1, dtype=np.int32)
        for j in range(k, -1, -1):
            key, out[j] = divmod(key, d + 1)
        return out

    while heap:
        size, key = heappop(heap)
        if best.get(key) != size:
            continue
        prof = decode(key)
        if len(settled_arr) and (settled_arr <= prof[None, :]).all(axis=1).any():
            continue
        if not prof[:k].any():
            return size
        used += len(settled_sizes) + 1
        if used > budget:
            bound = heap[0][0] if heap else size
            raise BudgetExhaustedError(
                f"min_tree_size(k={k}, d={d}) undecided; every (k,d)-tree has "
                f"size >= {min(size, bound)}"
            )
        settled_sizes.append(size)
        settled_arr = np.concatenate([settled_arr, prof[None, :]])
        # join the new state with every settled state (including itself)
        cands = np.zeros((len(settled_arr), k + 1), dtype=np.int32)
        cands[:, 1:] = settled_arr[:, :-1] + prof[None, :-1]
        ok = cands.sum(axis=1) <= d
        keys = (cands[ok].astype(key_dtype) @ radix_np).tolist()
        sizes = [size + s for s, flag in zip(settled_sizes, ok.tolist()) if flag]
        for w_key, w_size in zip(keys, sizes):
            old = best.get(w_key)
            if old is not None and old <= w_size:
                continue
            best[w_key] = w_size
            heappush(heap, (w_size, w_key))
    raise BudgetExhaustedError(f"state space exhausted: no (k,{d})-tree exists")


@dataclass(frozen=True)
class BruteForceResult:
    found: bool
    min_size: Optional[int]
    max_leaves: int


def brute_force_trees(k: int, d: int, max_leaves: int = 1 << 10) -> BruteForceResult:
    """Enumerate valid trees by leaf count; independent existence oracle.

    Level n holds the exact root profiles of n-leaf valid trees, pruned
    against profiles already achieved at equal or smaller sizes.  Finding
    a profile with an empty depth-(k-1) prefix at level n certifies the
    minimal (k,d)-tree size n; not finding one up to the cap is reported
    as such (existence beyond the cap stays open).
    """
    leaf = (1,) + (0,) * k
    levels: dict[int, list[tuple[int, ...]]] = {1: [leaf]}
    pareto: list[tuple[int, ...]] = [leaf]
    if all(e == 0 for e in leaf[:k]):  # k = 0 is out of scope, keep the guard cheap
        return BruteForceResult(True, 1, max_leaves)
    for n in range(2, max_leaves + 1):
        seen: set[tuple[int, ...]] = set()
        for i in range(1, n // 2 + 1):
            for p in levels.get(i, ()):
                for q in levels.get(n - i, ()):
                    w = (0,) + tuple(a + b for a, b in zip(p[:-1], q[:-1]))
                    if sum(w) <= d:
                        seen.add(w)
        retained = []
        for w in sorted(seen):
            if any(all(a <= b for a, b in zip(p, w)) for p in pareto):
                continue
            retained.append(w)
        retained = [
            w
            for idx, w in enumerate(retained)
            if not any(
                other != w and all(a <= b for a, b in zip(other, w))
                for other in retained
            )
        ]
        levels[n] = retained
        pareto.extend(retained)
        for w in retained:
            if all(e == 0 for e in w[:k]):
                return BruteForceResult(True, n, max_leaves)
    return BruteForceResult(False, None, max_leaves)


# ---------------------------------------------------------------------------
# persistent result cache


def cache_append(path: str, record: dict) -> None:
    record = dict(record, version=CACHE_VERSION)
    if "minSize" in record and record["minSize"] is not None:
        record["minSize"] = str(record["minSize"])
    with open(path, "a", encoding="ascii") as handle:
        handle.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")


def cache_load(path: str) -> list[dict]:
    out = []
    try:
        with open(path, "r", encoding="ascii") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    out.append(json.loads(line))
    except FileNotFoundError:
        pass
    return out


def cache_lookup(records: list[dict], k: int, d: int) -> Optional[dict]:
    for rec in reversed(records):
        if rec.get("k") == k and rec.get("d") == d:
            return rec
    return None
