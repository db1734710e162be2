from math import comb

import pytest
from gmpy2 import mpq, mpz
from hypothesis import given, settings, strategies as st

from ddesolve import MultiPoly, minimal_annihilator
from ddesolve.guess import (GUESS_VARS, GuessSpec, InsufficientOrder, evaluate_at_series, guess_annihilator,
                            nullspace_vector, provenance, verify_annihilator)

from conftest import expansion

CUBIC = ("64*t^3*z0^3 + (48*t^3 - 72*t^2 + 2*t)*z0^2 - (15*t^3 - 9*t^2 - 19*t + 1)*z0"
         " + t^3 + 27*t^2 - 19*t + 1")


def P(text):
    return MultiPoly.parse(text, GUESS_VARS)


CATALAN = [comb(2 * n, n) // (n + 1) for n in range(40)]


@pytest.mark.parametrize("series,expected", [
    (CATALAN, "t*z0^2 - z0 + 1"),
    ([1] * 30, "t*z0 - z0 + 1"),
    ([2 ** n for n in range(30)], "2*t*z0 - z0 + 1"),
])
def test_guess_known_series(series, expected):
    R = guess_annihilator(GuessSpec(series, 2, 2))
    assert R == P(expected).canonical()


def test_guess_requires_enough_terms():
    with pytest.raises(InsufficientOrder):
        guess_annihilator(GuessSpec(CATALAN[:20], 3, 3))
    with pytest.raises(ValueError):
        GuessSpec(CATALAN, 1, 1, margin=5)


def test_guess_returns_none_within_small_bounds():
    # the cubic cannot be found with z-degree 2
    assert guess_annihilator(GuessSpec(expansion("orientations", 40).z(0), 3, 2)) is None


def test_evaluate_is_horner():
    vals = evaluate_at_series(P("z0^2 - t"), [1, 1, 0, 0], 4)
    assert vals == [1, 1, 1, 0]


@pytest.mark.parametrize("text,order,coefficient", [
    ("z0 - 1", 1, 2),
    ("z0 - 1 - 2*t", 2, 10),
])
def test_verify_reports_first_failure(text, order, coefficient):
    v = verify_annihilator(P(text), expansion("orientations", 30).z(0), 30)
    assert (v.ok, v.first_failure, v.coefficient) == (False, order, coefficient)


def test_verify_cubic():
    assert verify_annihilator(P(CUBIC), expansion("orientations", 40).z(0), 40)


def test_verify_rejects_other_variables():
    from ddesolve import VarTable
    with pytest.raises(ValueError):
        evaluate_at_series(MultiPoly.parse("x + z0", VarTable(["x", "t", "z0"])), [1] * 5, 5)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(2, 6), st.data())
def test_nullspace_vector_is_kernel(m, n, data):
    rows = [[mpz(data.draw(st.integers(-4, 4))) for _ in range(n)] for _ in range(m)]
    x = nullspace_vector(rows, n)
    if m < n:
        assert x is not None
    if x is not None:
        assert any(x)
        for r in rows:
            assert sum(a * b for a, b in zip(r, x)) == 0


def test_minimal_annihilator_extracts_cubic():
    R = P(CUBIC) * P("z0 - 1") * P("2*t*z0 + t - 1")
    res = minimal_annihilator(R, expansion("orientations", 60).z(0))
    assert res.minimal and res.divides
    assert res.poly == P(CUBIC).canonical()
    assert res.quotient * res.poly == R or res.quotient * res.poly == -R


def test_minimal_annihilator_rejects_wrong_R():
    with pytest.raises(ValueError):
        minimal_annihilator(P("z0 - 1"), expansion("orientations", 30).z(0))


@pytest.mark.parametrize("Dt,Dz,N,bound,expected", [
    (3, 3, 60, 3, "certified"),
    (3, 3, 16, 3, "conjectural"),
    (3, 3, 60, None, "conjectural"),
    (3, 3, 60, 2, "conjectural"),
])
def test_provenance(Dt, Dz, N, bound, expected):
    assert provenance(Dt, Dz, N, bound) == expected
