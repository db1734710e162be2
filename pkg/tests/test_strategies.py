import time

import pytest

from ddesolve import MultiPoly, compare_strategies, parse_dde
from ddesolve.groebner import Budget
from ddesolve.guess import GUESS_VARS
from ddesolve.strategies import (HypothesisFailure, StrategyFailure, check_hypotheses, input_digest,
                                 reduce_to_single_equation, solve_auto, solve_by_duplication,
                                 solve_by_guessing, solve_by_reduction)

from conftest import load

QUADRATIC = "16*t^2*z0^2 - 8*t^2*z0 + t^2 - 12*t*z0 + 11*t + z0 - 1"
NO_ROOTS = "catalytic u at 0\nF1 = 1 + t*u*F1"


def P(text):
    return MultiPoly.parse(text, GUESS_VARS)


def test_hypotheses_orientations():
    d = check_hypotheses(load("orientations")).as_dict()
    assert d["h1_root_count"]["state"] == "confirmed" and d["h1_root_count"]["value"] == 2
    assert d["h1_distinct"]["state"] == "confirmed"
    assert d["h1_zero_dimensional"]["state"] == "confirmed"
    assert d["radical"]["state"] == "assumed"


def test_hypotheses_refuted():
    d = check_hypotheses(parse_dde(NO_ROOTS)).as_dict()
    assert d["h1_root_count"]["state"] == "refuted"
    assert d["h1_root_count"]["value"] == 0


def test_duplication_constellations():
    res = solve_by_duplication(load("2const"), Budget(seconds=120))
    assert res.minimal_factor == P(QUADRATIC).canonical()
    assert res.verified_to_order == 60
    assert res.method == "groebner-modular"


SIMPLE = "catalytic u at 0\nF1 = 1 + t*D[F1]"
QUARTIC = "catalytic u at 1\nF1 = 1 + t*u*F1^2 + t*D[F1]"


@pytest.mark.parametrize("source,methods", [
    (SIMPLE, ("groebner",)),
    (SIMPLE, ("resultant",)),
    (QUARTIC, ("resultant",)),
], ids=["simple-groebner", "simple-resultant", "quartic-resultant"])
def test_duplication_fallback_methods(source, methods):
    sys_ = parse_dde(source)
    modular = solve_by_duplication(sys_, Budget(seconds=60), N=40, methods=("modular",))
    other = solve_by_duplication(sys_, Budget(seconds=60), N=40, methods=methods)
    assert other.minimal_factor == modular.minimal_factor
    assert modular.minimal_factor.divides(other.R.to_vars(GUESS_VARS))


def test_block_groebner_honours_budget():
    t0 = time.monotonic()
    with pytest.raises(StrategyFailure, match="groebner: time budget"):
        solve_by_duplication(parse_dde(QUARTIC), Budget(seconds=3), N=30, methods=("groebner",))
    assert time.monotonic() - t0 < 10


def test_duplication_constant_system():
    res = solve_by_duplication(load("const"))
    assert res.R == P("z0 - 1")


def test_duplication_h1_failure():
    with pytest.raises(HypothesisFailure) as info:
        solve_by_duplication(parse_dde(NO_ROOTS))
    assert "0 Puiseux roots < nk=1" in str(info.value)


def test_duplication_budget():
    with pytest.raises(StrategyFailure):
        solve_by_duplication(load("orientations"), Budget(seconds=0.5), N=30)


def test_reduction_single_unknown_delegates():
    res = solve_by_reduction(load("2const"), Budget(seconds=120))
    assert res.minimal_factor == P(QUADRATIC).canonical()


def test_reduction_orientations_h2_failure():
    with pytest.raises(HypothesisFailure) as info:
        solve_by_reduction(load("orientations"), Budget(seconds=60))
    assert "1 Puiseux root < nk=2" in str(info.value)
    assert info.value.report.h2_root_count.state == "refuted"


def test_reduce_to_single_equation_orientations():
    red = reduce_to_single_equation(load("orientations"), Budget(seconds=60))
    assert red.principal
    assert set(red.E.used_vars()) <= {"x1", "u", "z0", "z1", "t"}
    assert red.E.degree("x1") == 2


def test_guessing_strategy():
    res = solve_by_guessing(load("2const"), N=40)
    assert res.R == P(QUADRATIC).canonical()
    assert res.minimal_provenance == "conjectural"


def test_auto_falls_back_to_guessing():
    res = solve_auto(parse_dde(NO_ROOTS), Budget(seconds=60), N=30)
    assert res.strategy == "guess"
    assert res.R == P("z0 - 1")
    assert any("H1 refuted" in f for f in res.details["fallbacks"])


@pytest.mark.parametrize("r1,r2,divides", [
    ("(z0 - 1)^2*(t*z0 - 1)", "t*z0 - 1", True),
    ("(z0 - 1)*(t*z0 - 1)", "(t*z0 - 1)^3", True),
    ("z0 - 1", "t*z0 - 1", False),
])
def test_compare_strategies(r1, r2, divides):
    assert compare_strategies(P(r1), P(r2)).divides is divides


def test_input_digest_stable():
    assert input_digest(load("orientations")) == input_digest(parse_dde(load("orientations").source))
    assert input_digest(load("orientations")) != input_digest(load("2const"))
