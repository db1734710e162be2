import pytest
from gmpy2 import mpq

from ddesolve import MultiPoly, duplicate, numerator_system, parse_dde
from ddesolve.expr import ParseError
from ddesolve.model import (deformation_parameters, shift_catalytic_point, system_to_text,
                            unshift_catalytic_point)

from conftest import load


def test_orientations_shape():
    s = load("orientations")
    assert (s.n, s.k, s.a, s.delta) == (2, 1, 1, 3)


def test_orientations_numerators():
    ns = numerator_system(load("orientations"))
    V = ns.vars
    E1 = MultiPoly.parse("(1 - x1)*(u - 1) + t*(2*u^2*x1^2 - u^2*z0 + 2*u^2*z1 - 2*u*x1^2 + u^2 + u*x1 - 2*u*z1 - u)", V)
    E2 = MultiPoly.parse("x2*(1 - u) + t*(2*u^2*x1*x2 + u^2*x1 - 2*u*x1*x2 - u*x1 + u*x2 - u*z1)", V)
    assert ns.m == (1, 1)
    assert ns.E[0] == E1 and ns.E[1] == E2


def test_orientations_jacobian_factors():
    ns = numerator_system(load("orientations"))
    V = ns.vars
    f1 = MultiPoly.parse("4*t*u^2*x1 - 4*t*u*x1 + t*u - u + 1", V)
    f2 = MultiPoly.parse("2*t*u^2*x1 - 2*t*u*x1 + t*u - u + 1", V)
    assert ns.Det == f1 * f2
    # Det is the Jacobian in x, P replaces the last column by d/du
    dE = [[e.deriv(v) for v in ("x1", "u")] for e in ns.E]
    assert ns.P == dE[0][0] * dE[1][1] - dE[0][1] * dE[1][0]


def test_orientations_dimension_of_duplicate():
    dup = duplicate(numerator_system(load("orientations")))
    assert len(dup.equations) == 8
    assert dup.unknowns == ["x1", "x2", "x3", "x4", "u1", "u2", "z0", "z1"]
    V = dup.vars
    expected = MultiPoly.parse("(u1 - u2)*(u1 - 1)*(u2 - 1)*t", V)
    assert dup.sat_squarefree.canonical() == expected.canonical()
    assert dup.rabinowitsch == MultiPoly.var(V, "m") * dup.sat_squarefree - 1


def test_deformation_parameters_orientations():
    p = deformation_parameters(shift_catalytic_point(load("orientations")))
    d = p.as_dict()
    assert (d["M"], d["beta"], d["alpha"]) == (2, 4, 72)
    assert d["gamma"] == [["1", "t^4"], ["t^4", "2"]]


def test_shift_roundtrip():
    s = load("orientations")
    shifted = shift_catalytic_point(s)
    assert shifted.a == 0
    assert unshift_catalytic_point(shifted).Q == s.Q


@pytest.mark.parametrize("name", ["orientations", "2const", "const"])
def test_text_roundtrip(name):
    s = load(name)
    again = parse_dde(system_to_text(s))
    assert (again.a, again.f, again.Q) == (s.a, s.f, s.Q)


def test_higher_order_and_rational_point():
    s = parse_dde("catalytic u at 1/2\norder 2\nF1 = 1 + t*(D2[F1] + u*F1^2)")
    assert s.k == 2 and s.a == mpq(1, 2)


@pytest.mark.parametrize("text,line,col", [
    ("F1 = 1 + t*(u", 1, 14),
    ("catalytic u at 1\ncatalytic u at 2\nF1 = t", 2, 1),
    ("F1 = 1 + t*u\nF1 = t", 2, 1),
    ("F2 = t", 1, 1),
    ("order 1\nF1 = 1 + t*D2[F1]", 2, None),
    ("", 1, 1),
    ("G = 1", 1, 1),
])
def test_parse_errors(text, line, col):
    with pytest.raises(ParseError) as info:
        parse_dde(text)
    assert info.value.line == line
    if col is not None:
        assert info.value.col == col
