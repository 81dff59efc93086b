import random

import pytest

from treesat.errors import WeightDeficientError
from treesat.vectors import (
    KdVector,
    OpParams,
    closed_form_entry,
    op_C,
    op_C_star,
    op_E,
    op_E_iter,
    prefix_weight_scaled,
    trim_to_weight_one,
    weight_scaled,
)

from oracles import naive_prefix_weight, naive_weight, random_cap_vector

P718 = OpParams(k=7, d=18, l=2)


def test_weight_scaled_examples():
    assert weight_scaled(KdVector(7, 18, (1, 0, 0, 0, 0, 0, 0, 0))) == 128
    assert weight_scaled(KdVector(7, 18, (0, 0, 0, 0, 0, 0, 0, 1))) == 1
    assert weight_scaled(KdVector(3, 8, (0, 1, 0, 2))) == 6


def test_prefix_weight_examples():
    x = KdVector(3, 8, (0, 1, 0, 2))
    assert prefix_weight_scaled(x, 1) == 4
    assert prefix_weight_scaled(x, 3) == weight_scaled(x)
    assert prefix_weight_scaled(KdVector(3, 8, (0, 0, 0, 2)), 2) == 0
    with pytest.raises(IndexError):
        prefix_weight_scaled(x, 4)


def test_weight_matches_fraction_oracle():
    rng = random.Random(20240901)
    for _ in range(300):
        k = rng.randint(1, 12)
        d = rng.randint(1, 40)
        entries = random_cap_vector(rng, k, d)
        x = KdVector(k, d, entries)
        assert weight_scaled(x) == naive_weight(entries) * 2**k
        r = rng.randint(0, k)
        assert prefix_weight_scaled(x, r) == naive_prefix_weight(entries, r) * 2**k


def test_op_params_values():
    assert P718.d_damped == 12
    assert P718.s == 4
    assert P718.gain.numerator == 4 and P718.gain.denominator == 3
    with pytest.raises(ValueError):
        OpParams(k=7, d=18, l=1)


def test_op_E_examples():
    assert op_E(KdVector.zero(7, 18), P718).entries == (0, 0, 0, 0, 0, 0, 0, 6)
    x = KdVector(7, 18, (0, 0, 0, 3, 5, 0, 0, 6))
    assert op_E(x, P718).entries == (0, 0, 1, 2, 0, 0, 3, 6)


def test_op_E_iter_matches_repeated_op_E():
    rng = random.Random(7)
    for _ in range(200):
        k = rng.randint(4, 12)
        l = rng.randint(2, max(2, k // 3))
        d = rng.randint(6, 200)
        p = OpParams(k=k, d=d, l=l)
        x = KdVector(k, d, random_cap_vector(rng, k, d))
        m = rng.randint(0, k + 3)
        y = x
        for _ in range(m):
            y = op_E(y, p)
        assert op_E_iter(x, m, p).entries == y.entries


def test_op_C_examples():
    x = KdVector(7, 18, (0, 0, 0, 0, 0, 4, 6, 8))
    assert op_C(x, 4, P718).entries == (0, 0, 0, 1, 2, 2, 3, 6)
    assert op_C(x, 7, P718).entries == (0, 0, 0, 0, 0, 0, 3, 6)
    with pytest.raises(IndexError):
        op_C(x, 1, P718)


def test_op_C_star_examples():
    p = OpParams(k=7, d=24, l=2)
    x = KdVector(7, 24, (0, 0, 1, 0, 2, 4, 6, 8))
    assert op_C_star(x, 4, p).entries == (1, 0, 2, 0, 0, 0, 0, 0)
    assert op_C_star(x, 2, p).entries == (1, 0, 0, 0, 0, 0, 0, 0)


def test_operator_outputs_are_valid_vectors():
    # Lemma-level size bounds: |E(x)| <= |x|/2 + d'/2 < d, |C_r| <= d, |C*_r| <= |x|
    rng = random.Random(99)
    for _ in range(1000):
        k = rng.randint(4, 12)
        l = rng.randint(2, max(2, k // 3))
        d = rng.randint(4, 100)
        p = OpParams(k=k, d=d, l=l)
        x = KdVector(k, d, random_cap_vector(rng, k, d))
        e = op_E(x, p)  # constructor would reject an invalid vector
        assert e.total() <= x.total() // 2 + p.damped_floor(1)
        assert e.total() < d
        r = rng.randint(l, k)
        assert op_C(x, r, p).total() <= d
        assert op_C_star(x, r, p).total() <= x.total()


def test_op_C_star_weight_lower_bound():
    # prefix weight >= 2^-l with an empty prefix below l lifts C* weight to >= 1
    rng = random.Random(4242)
    checked = 0
    while checked < 200:
        k = rng.randint(6, 12)
        l = rng.randint(2, max(2, k // 3))
        d = rng.randint(8, 120)
        p = OpParams(k=k, d=d, l=l)
        entries = [0] * (k + 1)
        budget = rng.randint(1, d)
        for _ in range(budget):
            entries[rng.randint(l + 1, k)] += 1
        x = KdVector(k, d, tuple(entries))
        r = next(
            (
                r
                for r in range(l, k + 1)
                if prefix_weight_scaled(x, r) >= 1 << (k - l)
            ),
            None,
        )
        if r is None:
            continue
        star = op_C_star(x, r, p)
        assert weight_scaled(star) >= 1 << k
        checked += 1


def test_trim_examples():
    assert trim_to_weight_one(KdVector(3, 8, (0, 1, 1, 2))).entries == (0, 1, 1, 2)
    assert trim_to_weight_one(KdVector(3, 8, (1, 1, 0, 0))).entries == (1, 0, 0, 0)
    with pytest.raises(WeightDeficientError):
        trim_to_weight_one(KdVector(3, 8, (0, 1, 0, 3)))


def test_trim_properties():
    rng = random.Random(55)
    for _ in range(500):
        k = rng.randint(1, 12)
        d = rng.randint(1, 60)
        x = KdVector(k, d, random_cap_vector(rng, k, d))
        if weight_scaled(x) < 1 << k:
            with pytest.raises(WeightDeficientError):
                trim_to_weight_one(x)
            continue
        y = trim_to_weight_one(x)
        assert weight_scaled(y) == 1 << k
        assert all(a <= b for a, b in zip(y.entries, x.entries))
        assert trim_to_weight_one(y).entries == y.entries


def test_weight_maximum_only_at_all_shallow():
    k, d = 5, 9
    top = weight_scaled(KdVector(k, d, (d, 0, 0, 0, 0, 0)))
    assert top == d * 2**k
    rng = random.Random(1)
    for _ in range(200):
        x = KdVector(k, d, random_cap_vector(rng, k, d))
        if x.entries != (d, 0, 0, 0, 0, 0):
            assert weight_scaled(x) < top


def test_closed_form_entry_examples():
    assert closed_form_entry(7, 0, P718) == 6  # floor(d'/2) with zero gain factors
    p = OpParams(k=16, d=207813, l=2)
    # entry j of the initial vector has c = 0
    assert closed_form_entry(16, 0, p) == p.damped_floor(1)
    with pytest.raises(IndexError):
        closed_form_entry(4, 0, P718)  # j must exceed s


def test_vector_validation():
    with pytest.raises(ValueError):
        KdVector(3, 8, (1, 2, 3))  # wrong length
    with pytest.raises(ValueError):
        KdVector(3, 8, (0, -1, 0, 0))
    with pytest.raises(ValueError):
        KdVector(3, 2, (1, 1, 1, 0))  # sum above d
