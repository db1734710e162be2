from math import comb

import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from ddesolve import MultiPoly, USeries, fixed_point_expand, newton_root_count, numerator_system
from ddesolve.series import PrecisionError, delta_a, eval_poly_at_series, solution_bindings, specialize

from conftest import expansion, load


def S(text, N=10):
    return USeries.from_poly(MultiPoly.parse(text, ["t", "u"]), N)


def test_orientations_prefix():
    assert expansion("orientations", 8).z(0).t_coeffs()[:4] == [1, 2, 10, 66]


def test_constellation_closed_form():
    a = expansion("2const", 12).z(0).t_coeffs()
    assert a[0] == 1
    for n in range(1, 12):
        assert a[n] == mpq(3 * 2 ** (n - 1), (n + 2) * (n + 1)) * comb(2 * n, n)


def test_constant_system_has_no_t_part():
    F = expansion("const", 6).F[0]
    assert F == S("1 + u", 6)


@pytest.mark.parametrize("name", ["orientations", "2const"])
def test_numerators_vanish_on_solution(name):
    # the numerator polynomials must vanish on the computed series
    sys_ = load(name)
    exp = fixed_point_expand(sys_, 20)
    ns = numerator_system(sys_)
    binds = solution_bindings(sys_, exp)
    for E in ns.E:
        val = eval_poly_at_series(E, binds, 20)
        assert all(not c for c in val.coeffs)


def test_orders_are_consistent():
    short = fixed_point_expand(load("orientations"), 6)
    long = fixed_point_expand(load("orientations"), 15)
    for a, b in zip(short.F, long.F):
        assert a == b


def test_delta_and_specialize_on_polynomial():
    F = S("u^3 + t*u", 4)
    assert delta_a(F, 1) == S("u^2 + u + 1 + t", 4)
    assert specialize(F, 2) == S("8 + 2*t", 4)
    assert specialize(F, 2, ell=1) == S("12 + t", 4)


coeffs = st.lists(st.lists(st.integers(-3, 3), max_size=4), min_size=1, max_size=5)


@settings(max_examples=50, deadline=None)
@given(coeffs, coeffs)
def test_series_ring_laws(a, b):
    A, B = USeries(a, 5), USeries(b, 5)
    assert A * B == B * A
    assert (A + B) - B == A
    assert (A * B).shift_t(1) == A.shift_t(1) * B


def test_power():
    assert S("1 + t") ** 3 == S("1 + 3*t + 3*t^2 + t^3")


@pytest.mark.parametrize("text,count,distinct", [
    ("(u - t)*(u + t)", 2, "confirmed"),
    ("u^2 - t", 2, "confirmed"),
    ("u*(u - t)", 1, "confirmed"),
    ("u - t^2", 1, "confirmed"),
    ("1 + u", 0, "confirmed"),
    ("(u - t)^2 + t^5", 2, "confirmed"),
    ("(u - t)^2", 2, "inconclusive"),
])
def test_newton_root_count(text, count, distinct):
    d = newton_root_count(S(text))
    assert d.root_count == count
    assert d.distinctness == distinct


def test_newton_root_count_centered():
    assert newton_root_count(S("(u - 1)^2 - t"), center=1).root_count == 2


def test_newton_precision_guard():
    with pytest.raises(PrecisionError):
        newton_root_count(S("u - t", 3), min_precision=5)
