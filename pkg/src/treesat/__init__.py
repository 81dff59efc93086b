"""Extremal unsatisfiable CNF formulas from binary trees.

Builds width-k clause-per-leaf formulas whose every variable occurrence
count sits at the satisfiability threshold, verifies their structure,
computes the exact threshold values by exhaustive search, and evaluates
the matching local-lemma lower bounds with rigorous arithmetic.
"""

from .bounds import bounds_report, bks_certificate_check, certify_f_lower
from .formula import CnfFormula, emit_dimacs, parse_dimacs, tree_to_cnf
from .recursion import derive_params, run, verify_closed_form
from .search import brute_force_trees, constructible_fixpoint, f2, min_tree_size
from .satcheck import dpll_sat, moser_tardos, verify_mu
from .trees import BinaryTree, kraft_tree, materialize, plan_from_trace, prune_to_minimal
from .vectors import KdVector, OpParams

__all__ = [
    "BinaryTree",
    "CnfFormula",
    "KdVector",
    "OpParams",
    "bks_certificate_check",
    "bounds_report",
    "brute_force_trees",
    "certify_f_lower",
    "constructible_fixpoint",
    "derive_params",
    "dpll_sat",
    "emit_dimacs",
    "f2",
    "kraft_tree",
    "materialize",
    "min_tree_size",
    "moser_tardos",
    "parse_dimacs",
    "plan_from_trace",
    "prune_to_minimal",
    "run",
    "tree_to_cnf",
    "verify_closed_form",
    "verify_mu",
]

__version__ = "0.1.0"
