import random

import pytest

from treesat import recursion, trees
from treesat.errors import (
    CapExceededError,
    InvalidTraceError,
    NotAKdTreeError,
    WeightNotOneError,
)
from treesat.trees import (
    BinaryTree,
    PlanBuilder,
    kraft_tree,
    materialize,
    plan_from_json,
    plan_from_trace,
    plan_to_json,
    prune_to_minimal,
    validate_kd_tree,
    validate_kdx_tree,
)
from treesat.vectors import (
    KdVector,
    op_C,
    op_C_star,
    op_E,
    trim_to_weight_one,
    weight_scaled,
)

from oracles import kraft_sum, leaf_depth_profile, random_cap_vector


def test_kraft_tree_examples():
    t = kraft_tree(KdVector(3, 8, (1, 0, 0, 0)))
    assert t.n_vertices == 1 and t.n_leaves == 1
    t = kraft_tree(KdVector(3, 8, (0, 2, 0, 0)))
    assert t.n_vertices == 3 and t.depth() == 1
    t = kraft_tree(KdVector(3, 8, (0, 1, 2, 0)))
    assert t.n_vertices == 5 and t.n_leaves == 3
    with pytest.raises(WeightNotOneError):
        kraft_tree(KdVector(3, 8, (0, 1, 0, 0)))


def test_kraft_tree_profile_and_kraft_equality():
    rng = random.Random(31)
    built = 0
    while built < 300:
        k = rng.randint(1, 10)
        d = rng.randint(1, 64)
        x = KdVector(k, d, random_cap_vector(rng, k, d))
        if weight_scaled(x) < 1 << k:
            continue
        y = trim_to_weight_one(x)
        t = kraft_tree(y)
        assert leaf_depth_profile(t, k) == list(y.entries)
        assert kraft_sum(t) == 1
        assert t.depth() <= k
        assert validate_kdx_tree(t, k, d, x)
        built += 1


def test_kraft_tree_deterministic():
    y = KdVector(5, 20, (0, 1, 1, 1, 2, 0))
    assert weight_scaled(y) == 1 << 5
    a, b = kraft_tree(y), kraft_tree(y)
    assert a.first == b.first and a.second == b.second


def test_validate_kd_tree_basics():
    assert validate_kd_tree(BinaryTree.complete(3), 3, 8)
    assert not validate_kd_tree(kraft_tree(KdVector(1, 2, (1, 0))), 1, 2)
    # cap violation: complete depth-3 has 8 window leaves at the root
    res = validate_kd_tree(BinaryTree.complete(3), 3, 7)
    assert not res and "cap" in res.violation


def test_validate_kdx_monotone_in_profile():
    y = KdVector(4, 16, (0, 1, 1, 1, 2))
    t = kraft_tree(y)
    assert validate_kdx_tree(t, 4, 16, y)
    bigger = KdVector(4, 16, (1, 1, 2, 2, 8))
    assert validate_kdx_tree(t, 4, 16, bigger)
    smaller = KdVector(4, 16, (0, 1, 1, 1, 1))
    assert not validate_kdx_tree(t, 4, 16, smaller)


def test_doubling_validates_against_preimage():
    # a tree realizing E(x) joined with a copy of itself realizes x
    rng = random.Random(67)
    checked = 0
    while checked < 200:
        k = rng.randint(4, 10)
        l = rng.randint(2, max(2, k // 3))
        d = rng.randint(8, 64)
        from treesat.vectors import OpParams

        p = OpParams(k=k, d=d, l=l)
        x = KdVector(k, d, random_cap_vector(rng, k, d))
        ex = op_E(x, p)
        if weight_scaled(ex) < 1 << k:
            continue
        t = kraft_tree(trim_to_weight_one(ex))
        doubled = BinaryTree.join(t, t)
        assert validate_kdx_tree(doubled, k, d, x)
        checked += 1


def _lemma_splice_instance():
    # real recursion vectors: k=16, d=16000 step 0 has Kraft-realizable
    # quotient and remainder
    p = recursion.derive_params(16, 16000)
    trace = recursion.run(p)
    st = trace.steps[0]
    return p, st.vector, st.r


def test_splice_validates_with_side_condition():
    p, x, r = _lemma_splice_instance()
    op = p.op
    c = op_C(x, r, op)
    cs = op_C_star(x, r, op)
    assert weight_scaled(c) >= 1 << p.k and weight_scaled(cs) >= 1 << p.k
    assert cs.total() << op.l < p.d  # strict star bound
    b = PlanBuilder(p.k, p.d)
    node = b.splice(op.l, b.kraft(trim_to_weight_one(c)), b.kraft(trim_to_weight_one(cs)), r)
    t = materialize(b.build(node))
    assert validate_kdx_tree(t, p.k, p.d, x)


def test_splice_star_bound_violation_is_caught():
    # star remainder at 3 > d/2^l = 2 overloads a depth-1 scaffold vertex
    k, d, l = 4, 8, 2
    main = KdVector(k, d, (0, 0, 2, 4, 0))
    star = KdVector(k, d, (0, 1, 2, 0, 0))
    b = PlanBuilder(k, d)
    node = b.splice(l, b.kraft(main), b.kraft(star), k)
    t = materialize(b.build(node))
    res = validate_kd_tree(t, k, d)
    assert not res and "cap" in res.violation
    # the same shape passes once the cap has room for the remainder
    profile = KdVector(k, 12, (0, 0, 0, 1, 8))
    assert validate_kdx_tree(t, k, 12, profile)


def test_prune_to_minimal():
    c3 = BinaryTree.complete(3)
    pruned = prune_to_minimal(c3, 3, 8)
    assert pruned.n_vertices == c3.n_vertices  # complete depth-k is already minimal
    c4 = BinaryTree.complete(4)
    pruned = prune_to_minimal(c4, 3, 8)
    assert pruned.depth() == 3 and validate_kd_tree(pruned, 3, 8)
    again = prune_to_minimal(pruned, 3, 8)
    assert again.n_vertices == pruned.n_vertices
    with pytest.raises(NotAKdTreeError):
        prune_to_minimal(kraft_tree(KdVector(2, 4, (1, 0, 0))), 2, 4)


def test_plan_from_trace_single_step():
    p = recursion.derive_params(16)
    trace = recursion.run(p)
    plan = plan_from_trace(trace)
    assert plan.validate()
    # no splices: doubling chain over the trimmed initial vector
    x0 = trace.steps[0].vector
    trimmed = trim_to_weight_one(x0)
    assert plan.leaf_count == (1 << (p.k - p.op.s)) * trimmed.total()
    assert plan.leaf_count == 131072 and plan.depth == 17
    assert plan.depth <= p.k * p.d


def test_plan_from_trace_multi_step():
    p = recursion.derive_params(16, 10368)
    trace = recursion.run(p)
    plan = plan_from_trace(trace)
    assert plan.validate()
    qs = trace.q_history()
    assert plan.depth <= (p.k - p.op.s) + sum(qs) + p.k
    assert plan.depth <= p.k * p.d
    bad = recursion.run(recursion.derive_params(16, 10367))
    with pytest.raises(InvalidTraceError):
        plan_from_trace(bad)


def test_plan_json_roundtrip():
    p = recursion.derive_params(16, 10368)
    plan = plan_from_trace(recursion.run(p))
    text = plan_to_json(plan)
    again = plan_from_json(text)
    assert again == plan
    assert plan_to_json(again) == text


def test_materialize_counts_match_plan():
    rng = random.Random(3)
    for _ in range(200):
        k = rng.randint(2, 6)
        d = rng.randint(4, 40)
        b = PlanBuilder(k, d)
        x = KdVector(k, d, random_cap_vector(rng, k, d))
        if weight_scaled(x) < 1 << k:
            continue
        node = b.kraft(trim_to_weight_one(x))
        for _ in range(rng.randint(0, 3)):
            node = b.double(node)
        plan = b.build(node)
        t = materialize(plan)
        assert t.n_leaves == plan.leaf_count
        assert t.depth() == plan.depth
        assert kraft_sum(t) == 1


def test_materialize_cap():
    p = recursion.derive_params(16)
    plan = plan_from_trace(recursion.run(p))
    with pytest.raises(CapExceededError) as err:
        materialize(plan, cap_vertices=1000)
    assert err.value.required == 2 * plan.leaf_count - 1


def test_materialized_construction_validates_end_to_end():
    p = recursion.derive_params(16)
    plan = plan_from_trace(recursion.run(p))
    t = materialize(plan)
    assert validate_kd_tree(t, p.k, p.d)
    assert validate_kdx_tree(t, p.k, p.d, KdVector.zero(p.k, p.d))


def test_double_and_splice_shapes():
    b = PlanBuilder(2, 4)
    leaf = b.kraft(KdVector(2, 4, (1, 0, 0)))
    t = materialize(b.build(b.double(leaf)))
    assert t.n_vertices == 3
    b2 = PlanBuilder(2, 8)
    leaf2 = b2.kraft(KdVector(2, 8, (1, 0, 0)))
    t2 = materialize(b2.build(b2.splice(2, leaf2, leaf2, 2)))
    assert t2.n_leaves == 4 and t2.depth() == 2


def test_hash_consing_shares_nodes():
    b = PlanBuilder(3, 8)
    a = b.kraft(KdVector(3, 8, (0, 0, 0, 8)))
    c = b.kraft(KdVector(3, 8, (0, 0, 0, 8)))
    assert a == c
    d1 = b.double(a)
    d2 = b.double(c)
    assert d1 == d2
