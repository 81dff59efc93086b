import random

import pytest

from treesat.errors import BudgetExhaustedError, FormulaError
from treesat.formula import CnfFormula, clause_satisfied, tree_to_cnf
from treesat.satcheck import (
    dpll_sat,
    moser_tardos,
    random_ks_cnf,
    solution_lines,
    verify_mu,
)
from treesat.trees import BinaryTree

from oracles import brute_force_satisfiable


def random_formula(rng, max_vars=12):
    n_vars = rng.randint(2, max_vars)
    k = rng.randint(1, min(3, n_vars))
    n_clauses = rng.randint(1, 4 * n_vars)
    clauses = []
    for _ in range(n_clauses):
        vs = rng.sample(range(1, n_vars + 1), k)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return CnfFormula(k=k, n_vars=n_vars, clauses=tuple(clauses))


def test_dpll_basics():
    assert dpll_sat(CnfFormula(k=1, n_vars=1, clauses=((1,), (-1,)))) is None
    model = dpll_sat(CnfFormula(k=2, n_vars=2, clauses=((1, 2), (-1, 2))))
    assert model is not None and model[2] is True
    assert dpll_sat(tree_to_cnf(BinaryTree.complete(2), 2)) is None


def test_dpll_returns_total_verified_assignments():
    rng = random.Random(2)
    for _ in range(200):
        F = random_formula(rng)
        model = dpll_sat(F)
        if model is not None:
            assert set(model) == set(range(1, F.n_vars + 1))
            assert all(clause_satisfied(c, model) for c in F.clauses)


def test_dpll_agrees_with_enumeration():
    rng = random.Random(3)
    for _ in range(300):
        F = random_formula(rng, max_vars=10)
        assert (dpll_sat(F) is not None) == brute_force_satisfiable(F)


def test_dpll_budget_is_distinct_from_unsat():
    F = random_ks_cnf(3, 8, 40, 90, random.Random(5))
    with pytest.raises(BudgetExhaustedError):
        dpll_sat(F, node_limit=0)


def test_verify_mu():
    assert verify_mu(CnfFormula(k=1, n_vars=1, clauses=((1,), (-1,))))
    extra = CnfFormula(k=1, n_vars=2, clauses=((1,), (-1,), (2,)))
    assert not verify_mu(extra)
    for depth, k in ((2, 2), (3, 3), (4, 4)):
        assert verify_mu(tree_to_cnf(BinaryTree.complete(depth), k))
    # satisfiable input is not minimally unsatisfiable
    assert not verify_mu(CnfFormula(k=1, n_vars=1, clauses=((1,),)))


def test_moser_tardos_smoke():
    F = CnfFormula(k=2, n_vars=4, clauses=((1, 2), (-1, 3), (2, -4)))
    model, used = moser_tardos(F, seed=1, max_resamples=1000)
    assert model is not None
    assert all(clause_satisfied(c, model) for c in F.clauses)
    # an initially satisfied formula needs zero resamples
    tiny = CnfFormula(k=2, n_vars=2, clauses=((1, 2),))
    model, used = moser_tardos(tiny, seed=1, max_resamples=100)
    assert model is not None and used == 0
    bad = CnfFormula(k=1, n_vars=1, clauses=((1,), (-1,)))
    model, used = moser_tardos(bad, seed=1, max_resamples=60)
    assert model is None and used == 60


def test_moser_tardos_deterministic():
    F = random_ks_cnf(5, 10, 40, 30, random.Random(9))
    a1 = moser_tardos(F, seed=123, max_resamples=10_000)
    a2 = moser_tardos(F, seed=123, max_resamples=10_000)
    assert a1 == a2


def test_moser_tardos_below_threshold():
    # occurrence cap 12 = floor(2^8/(7e)) - 1 keeps resampling convergent
    for i in range(10):
        F = random_ks_cnf(7, 12, 60, 48, random.Random(1000 + i))
        model, _ = moser_tardos(F, seed=i, max_resamples=10_000 * F.n_clauses)
        assert model is not None


def test_random_ks_cnf_respects_cap():
    rng = random.Random(31)
    F = random_ks_cnf(4, 6, 30, 40, rng)
    occ = {}
    for c in F.clauses:
        for lit in c:
            occ[abs(lit)] = occ.get(abs(lit), 0) + 1
    assert max(occ.values()) <= 6
    with pytest.raises(FormulaError):
        random_ks_cnf(4, 2, 10, 100, rng)


def test_solution_lines():
    assert solution_lines(None) == ["s UNSATISFIABLE"]
    lines = solution_lines({1: True, 2: False})
    assert lines[0] == "s SATISFIABLE"
    assert lines[1] == "v 1 -2 0"
