"""Exact solver for discrete differential equations with one catalytic variable."""

__version__ = "0.1.0"

from .poly import MultiPoly, MonomialOrder, VarTable, DEGREVLEX  # noqa: E402
from .series import USeries, fixed_point_expand, newton_root_count  # noqa: E402
from .model import DdeSystem, parse_dde, numerator_system, duplicate  # noqa: E402
from .strategies import (solve_by_duplication, solve_by_reduction, reduce_to_single_equation,  # noqa: E402
                         check_hypotheses, compare_strategies, degree_bound_thm2,
                         degree_bound_duplication)
from .guess import GuessSpec, guess_annihilator, verify_annihilator, minimal_annihilator  # noqa: E402

__all__ = [
    "MultiPoly", "MonomialOrder", "VarTable", "DEGREVLEX", "USeries", "fixed_point_expand",
    "newton_root_count", "DdeSystem", "parse_dde", "numerator_system", "duplicate",
    "solve_by_duplication", "solve_by_reduction", "reduce_to_single_equation", "check_hypotheses",
    "compare_strategies", "degree_bound_thm2", "degree_bound_duplication", "GuessSpec",
    "guess_annihilator", "verify_annihilator", "minimal_annihilator",
]
