import random

import pytest

from treesat.errors import BudgetExhaustedError
from treesat.search import (
    brute_force_trees,
    cache_append,
    cache_load,
    cache_lookup,
    constructible_fixpoint,
    f2,
    is_constructible,
    kd_tree_target,
    min_tree_size,
    weight_one_vectors,
    witness_tree,
)
from treesat.trees import validate_kdx_tree
from treesat.vectors import KdVector, weight_scaled

from oracles import naive_weight


def test_weight_one_vectors():
    got = weight_one_vectors(2, 4)
    assert set(got) == {(1, 0, 0), (0, 2, 0), (0, 1, 2), (0, 0, 4)}
    for k, d in ((3, 6), (4, 10), (5, 12)):
        for v in weight_one_vectors(k, d):
            assert naive_weight(v) == 1 and sum(v) <= d


def test_fixpoint_k1_d2():
    chain = constructible_fixpoint(1, 2)
    assert chain.at_fixed_point
    assert chain.elements == ((0, 0),)
    assert is_constructible(KdVector(1, 2, (0, 2)), chain)
    assert is_constructible(KdVector(1, 2, (0, 1)), chain)


def test_fixpoint_weight_one_always_constructible():
    rng = random.Random(8)
    chain = constructible_fixpoint(3, 5)
    for _ in range(200):
        entries = [0] * 4
        for _ in range(rng.randint(0, 5)):
            entries[rng.randint(0, 3)] += 1
        x = KdVector(3, 5, tuple(entries))
        if weight_scaled(x) >= 1 << 3:
            assert is_constructible(x, chain)


def test_fixpoint_domination_monotone():
    chain = constructible_fixpoint(3, 4)
    rng = random.Random(15)
    for el in chain.elements:
        grown = list(el)
        grown[rng.randint(0, 3)] += 1
        if sum(grown) <= 4:
            assert is_constructible(KdVector(3, 4, tuple(grown)), chain)


def test_deep_only_vector_not_constructible():
    chain = constructible_fixpoint(3, 2)
    assert not is_constructible(KdVector(3, 2, (0, 0, 0, 2)), chain)


def test_zero_vector_below_threshold_not_constructible():
    # no (3,3)-tree exists, so certainly no zero-profile one
    chain = constructible_fixpoint(3, 3)
    assert not is_constructible(KdVector.zero(3, 3), chain)
    chain4 = constructible_fixpoint(3, 4)
    assert is_constructible(KdVector.zero(3, 4), chain4)


def test_fixpoint_monotone_in_d():
    # every d-constructible element stays constructible at d+1
    for d in (2, 3, 4):
        lo = constructible_fixpoint(3, d)
        hi = constructible_fixpoint(3, d + 1)
        for el in lo.elements:
            assert is_constructible(KdVector(3, d + 1, el), hi)


def test_fixpoint_budget_exhaustion():
    chain = constructible_fixpoint(4, 5, budget=10)
    assert not chain.at_fixed_point
    assert chain.budget_used <= 10
    with pytest.raises(BudgetExhaustedError):
        f2(4, d_max=8, budget=10)


def test_witness_trees_validate():
    for k, d in ((2, 3), (3, 4), (3, 5)):
        chain = constructible_fixpoint(k, d, witnesses=True)
        assert chain.derivations is not None
        for el in chain.elements:
            tree = witness_tree(chain, el)
            assert validate_kdx_tree(tree, k, d, KdVector(k, d, el))


def test_f2_small_values():
    assert f2(1, d_max=8) == 1
    assert f2(2, d_max=8) == 2
    assert f2(3, d_max=8) == 3
    assert f2(4, d_max=8) == 4


def test_f2_agrees_with_brute_force_existence():
    # mutual oracle on every small instance: fixed point vs enumeration
    for k in (1, 2, 3):
        for d in range(1, 7):
            chain = constructible_fixpoint(k, d)
            exists = is_constructible(kd_tree_target(k, d), chain)
            bf = brute_force_trees(k, d, max_leaves=64)
            assert bf.found == exists


def test_brute_force_examples():
    assert brute_force_trees(2, 4, 64) == brute_force_trees(2, 4, 64)
    r = brute_force_trees(2, 4, 64)
    assert r.found and r.min_size == 4
    r = brute_force_trees(3, 3, 256)
    assert not r.found and r.min_size is None
    r = brute_force_trees(3, 4, 64)
    assert r.found and r.min_size == 16


def test_min_tree_size_values():
    # k <= 3 frozen values, cross-checked by the enumeration oracle below
    assert min_tree_size(1, 2) == 2
    assert min_tree_size(2, 3) == 5
    assert min_tree_size(2, 4) == 4
    assert min_tree_size(3, 4) == 16
    assert min_tree_size(3, 8) == 8
    assert min_tree_size(4, 5) == 257


def test_min_tree_size_monotone_in_d():
    sizes = [min_tree_size(3, d) for d in range(4, 9)]
    assert sizes == sorted(sizes, reverse=True)
    assert sizes[-1] == 8  # d >= 2^k: the complete depth-k tree


def test_min_tree_size_matches_brute_force():
    for k, d, cap in ((1, 2, 16), (2, 3, 32), (2, 5, 32), (3, 5, 64), (3, 6, 64)):
        assert min_tree_size(k, d) == brute_force_trees(k, d, cap).min_size


def test_min_tree_size_budget():
    with pytest.raises(BudgetExhaustedError):
        min_tree_size(4, 5, budget=5)


def test_cache_roundtrip(tmp_path):
    path = str(tmp_path / "cache.jsonl")
    assert cache_load(path) == []
    cache_append(path, {"k": 5, "d": 7, "exists": False, "budgetUsed": 10})
    cache_append(path, {"k": 5, "d": 8, "exists": True, "minSize": 10**13, "budgetUsed": 10})
    records = cache_load(path)
    assert len(records) == 2
    rec = cache_lookup(records, 5, 8)
    assert rec["exists"] and rec["minSize"] == str(10**13)
    assert cache_lookup(records, 5, 9) is None
    assert all(r["version"] == 1 for r in records)
