from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from ddesolve import MonomialOrder, MultiPoly, VarTable
from ddesolve.poly import (StructureError, bivariate_gcd, det_bareiss, determinant, jacobian_determinant,
                           resultant, squarefree_part)
from ddesolve import upoly

V = VarTable(["x", "y", "t"])
TZ = VarTable(["t", "z0"])


def P(text, vars=V):
    return MultiPoly.parse(text, vars)


@pytest.mark.parametrize("text,expected", [
    ("(x + 1)^2", "x^2 + 2*x + 1"),
    ("x*y - y*x", "0"),
    ("3/4*x - x/4", "1/2*x"),
    ("-(x - y)", "-x + y"),
    ("(x + y)*(x - y)", "x^2 - y^2"),
])
def test_parse_and_normalize(text, expected):
    assert P(text) == P(expected)


def test_text_roundtrip():
    p = P("2/3*x^3*y - 5*t + 7")
    assert P(p.to_text()) == p


def test_degrees_and_coeffs():
    p = P("x^3*y + x*t^2 + 1")
    assert p.degree() == 4
    assert p.degree("t") == 2
    assert p.used_vars() == ["x", "y", "t"]
    assert [c.to_text() for c in p.coeffs_in("t")] == ["x^3*y + 1", "0", "x"]


@pytest.mark.parametrize("order,lead", [
    (MonomialOrder.degrevlex(), (1, 1, 0)),
    (MonomialOrder.block(["t"], ["x", "y"]), (0, 0, 1)),
])
def test_leading_monomial(order, lead):
    assert P("x*y + t + x").lead(order)[0] == lead


def test_substitute_and_evaluate():
    p = P("x^2 + y*t")
    assert p.subs({"x": P("y + 1")}) == P("y^2 + 2*y + 1 + y*t")
    assert p.evaluate({"x": 2, "y": Fraction(1, 2), "t": 4}) == 6


def test_derivative():
    assert P("x^3*y + x*t").deriv("x") == P("3*x^2*y + t")


def test_exact_division():
    f = P("(x + y)*(x - 2*t)")
    assert f.exact_div(P("x - 2*t")) == P("x + y")
    with pytest.raises(ArithmeticError):
        f.exact_div(P("x + 1"))
    assert not P("x + 1").divides(f)


def test_content_and_canonical():
    p = P("-4*x + 6*y")
    assert p.content() == 2
    assert p.canonical() == P("2*x - 3*y")


@pytest.mark.parametrize("f,g,var,expected", [
    ("x^2 - y", "x - t", "x", "t^2 - y"),
    ("x^2 + 1", "x^2 - 1", "x", "4"),
    ("x*y - 1", "x + y", "x", "-y^2 - 1"),
])
def test_resultant(f, g, var, expected):
    r = resultant(P(f), P(g), var)
    assert r.canonical() == P(expected).canonical()


small = st.integers(-3, 3)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.data())
def test_determinant_methods_agree(n, data):
    rows = [[P(f"{data.draw(small)}*x + {data.draw(small)}*t + {data.draw(small)}") for _ in range(n)]
            for _ in range(n)]
    assert determinant(rows) == det_bareiss(rows)


def test_jacobian_of_linear_map():
    polys = [P("2*x + 3*y"), P("x - y")]
    assert jacobian_determinant(polys, ["x", "y"]) == P("-5")


def test_bivariate_gcd():
    g = P("t*z0 - 1", TZ)
    a = g * P("z0 + t", TZ)
    b = g * P("z0^2 - t", TZ)
    assert bivariate_gcd(a, b, "t", "z0").canonical() == g.canonical()


@pytest.mark.parametrize("text,expected", [
    ("(z0 - 1)^3*(t*z0 + 1)", "(z0 - 1)*(t*z0 + 1)"),
    ("t^2*(z0 - t)^2", "t*(z0 - t)"),
    ("z0^2 - t", "z0^2 - t"),
])
def test_squarefree_part(text, expected):
    got = squarefree_part(P(text, TZ), "t", "z0")
    assert got.canonical() == P(expected, TZ).canonical()


def test_squarefree_rejects_three_variables():
    with pytest.raises(StructureError):
        squarefree_part(P("x*y*t"))


# -- dense univariate helpers ---------------------------------------------------

ulist = st.lists(st.fractions(min_value=-4, max_value=4, max_denominator=3), max_size=5)


@settings(max_examples=60, deadline=None)
@given(ulist, ulist.filter(lambda c: any(c)))
def test_udivmod_contract(a, b):
    a = upoly.trim([mpq(x) for x in a])
    b = upoly.trim([mpq(x) for x in b])
    q, r = upoly.divmod_(a, b)
    assert upoly.add(upoly.mul(q, b), r) == a
    assert upoly.deg(r) < upoly.deg(b)


def test_ugcd():
    a = upoly.mul([mpq(-1), mpq(1)], [mpq(2), mpq(1)])
    b = upoly.mul([mpq(-1), mpq(1)], [mpq(3), mpq(0), mpq(1)])
    assert upoly.gcd(a, b) == [-1, 1]


def test_interpolate():
    xs = [mpq(x) for x in (0, 1, 2, 5)]
    poly = [mpq(3), mpq(-1), mpq(0), mpq(2)]
    ys = [upoly.evaluate(poly, x) for x in xs]
    assert upoly.interpolate(xs, ys) == poly


P61 = (1 << 61) - 1


def test_integer_rational_reconstruction():
    n, d = -7, 13
    a = n * pow(d, -1, P61) % P61
    assert upoly.rational_reconstruct_int(a, P61) == mpq(n, d)


@pytest.mark.parametrize("num,den", [([3, 1], [1, 2, 1]), ([5], [7, 0, 1]), ([0, 0, 4], [1])])
def test_polynomial_rational_reconstruction(num, den):
    p = P61
    pts = list(range(2, 14))
    modulus = [1]
    for x in pts:
        modulus = upoly.mod_mul(modulus, [-x % p, 1], p)
    ys = [upoly.mod_eval(num, x, p) * pow(upoly.mod_eval(den, x, p), -1, p) % p for x in pts]
    a = upoly.mod_interpolate(pts, ys, p)
    n, d, slack = upoly.mod_rational_reconstruct_mq(a, modulus, p)
    inv = pow(den[-1], -1, p)
    assert d == [c * inv % p for c in den]
    assert n == [c * inv % p for c in num]
    assert slack >= 5
