import pytest
from hypothesis import given, settings, strategies as st

from ddesolve import DEGREVLEX, MonomialOrder, MultiPoly, VarTable, duplicate, numerator_system
from ddesolve.groebner import (Budget, BudgetExhausted, IdealPresentation, ReplayMismatch, Ring, Trace,
                               buchberger, eliminate, groebner_internal, is_zero_dimensional,
                               iterated_resultant_eliminate, saturate)
from ddesolve.modular import PRIME_START, SliceEliminator, minimal_polynomial, primes

from conftest import load

V = VarTable(["x", "y", "z"])
PRIME = next(primes())


def P(text, vars=V):
    return MultiPoly.parse(text, vars)


def gb_texts(gb):
    return sorted(g.canonical().to_text() for g in gb.polys)


def test_primes_start_above_bound():
    gen = primes()
    a, b = next(gen), next(gen)
    assert PRIME_START < a < b


@pytest.mark.parametrize("gens,expected", [
    (["x^2 - y", "x*y - 1"], ["x*y - 1", "x^2 - y", "y^2 - x"]),
    (["x + y + z", "x*y + y*z + z*x", "x*y*z - 1"], ["x + y + z", "y^2 + y*z + z^2", "z^3 - 1"]),
    (["x^2", "x*y - 1"], ["1"]),
])
def test_hand_bases(gens, expected):
    gb = buchberger(IdealPresentation.of([P(g) for g in gens]))
    assert gb_texts(gb) == expected


def test_lex_like_block_order():
    order = MonomialOrder.block(["x"], ["y"])
    gb = buchberger(IdealPresentation.of([P("x^2 + y^2 - 1"), P("x - y")], order))
    assert P("2*y^2 - 1").canonical().to_text() in gb_texts(gb)


lin = st.integers(-3, 3)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(lin, lin, lin, lin, lin), min_size=1, max_size=3))
def test_generators_reduce_to_zero(rows):
    gens = [P(f"{a}*x^2 + {b}*x*y + {c}*y*z + {d}*z + {e}") for a, b, c, d, e in rows]
    gens = [g for g in gens if g]
    if not gens:
        return
    gb = buchberger(IdealPresentation.of(gens), Budget(seconds=30))
    for g in gens:
        assert gb.contains(g)
    # reduced: no leading monomial divides another
    leads = gb.leading_monomials()
    for i, a in enumerate(leads):
        for j, b in enumerate(leads):
            assert i == j or not all(x <= y for x, y in zip(a, b))


def test_modular_agrees_with_rational():
    gens = [P("x^2 - 3*y + z"), P("y^2 - x*z - 2"), P("z^2 - x + 5")]
    q = buchberger(IdealPresentation.of(gens))
    m = buchberger(IdealPresentation.of(gens), p=PRIME)
    assert q.leading_monomials() == m.leading_monomials()
    for a, b in zip(q.polys, m.polys):
        for e, c in a.terms.items():
            assert (int(c.numerator) * pow(int(c.denominator), -1, PRIME) - int(b.terms[e])) % PRIME == 0


def test_groups_match_plain_run():
    W = VarTable(["a", "b", "c", "d"])
    block1 = buchberger(IdealPresentation.of([P("a^2 - b", W), P("a*b - 1", W)]), p=PRIME).polys
    block2 = buchberger(IdealPresentation.of([P("c^2 - d - 1", W), P("c*d - 2", W)]), p=PRIME).polys
    link = P("a + c - b*d", W)
    ring = Ring(W, DEGREVLEX)
    gens = [ring.from_poly(f, PRIME) for f in block1 + block2 + (link,)]
    labels = [0] * len(block1) + [1] * len(block2) + [None]
    plain = groebner_internal(ring, gens, PRIME)
    grouped = groebner_internal(ring, gens, PRIME, groups=labels)
    assert [ring.to_poly(f, PRIME) for f in plain] == [ring.to_poly(f, PRIME) for f in grouped]


def _shaped(c):
    return [P(f"x^2 - {c[0]}*y + z"), P(f"x*y - {c[1]}*z - 1"), P(f"y^2 - x + {c[2]}")]


def test_replay_reproduces_fresh_run():
    ring = Ring(V, DEGREVLEX)
    trace = Trace()
    groebner_internal(ring, [ring.from_poly(f, PRIME) for f in _shaped((3, 2, 1))], PRIME, trace=trace)
    assert trace.steps
    gens = [ring.from_poly(f, PRIME) for f in _shaped((7, 11, 13))]
    fresh = groebner_internal(ring, gens, PRIME)
    replayed = groebner_internal(ring, gens, PRIME, trace=Trace(), replay=trace.steps)
    assert fresh == replayed


def test_replay_detects_divergence():
    ring = Ring(V, DEGREVLEX)
    trace = Trace()
    groebner_internal(ring, [ring.from_poly(f, PRIME) for f in _shaped((3, 2, 1))], PRIME, trace=trace)
    other = [P("x^2 - y + z"), P("x*y - z"), P("y^2 - x*z")]
    with pytest.raises(ReplayMismatch):
        groebner_internal(ring, [ring.from_poly(f, PRIME) for f in other], PRIME, trace=Trace(),
                          replay=trace.steps)


def test_budget_pairs():
    with pytest.raises(BudgetExhausted):
        buchberger(IdealPresentation.of(_shaped((3, 2, 1))), Budget(max_pairs=2))


def test_saturation_and_elimination():
    sat = saturate(IdealPresentation.of([P("x*y"), P("y^2")]), P("y"))
    assert [g.constant_value() for g in sat.generators] == [1]
    el = eliminate(IdealPresentation.of([P("x - y^2"), P("z - x^2")]), ["y", "z"])
    assert [g.canonical().to_text() for g in el.generators] == ["y^4 - z"]


def test_zero_dimensional():
    assert is_zero_dimensional(buchberger(IdealPresentation.of([P("x^2 - 1"), P("y - x"), P("z")])))
    assert not is_zero_dimensional(buchberger(IdealPresentation.of([P("x*y - 1"), P("z")])))
    assert is_zero_dimensional(buchberger(IdealPresentation.of([P("x^2 - z"), P("y - x")])), over_params=["z"])


def test_minimal_polynomial_mod_p():
    ring = Ring(V, DEGREVLEX)
    basis = groebner_internal(ring, [ring.from_poly(P(f), PRIME) for f in ("x^2 - 2", "y - x - 1", "z")], PRIME)
    mp = minimal_polynomial(ring, basis, "y", PRIME)
    assert mp == [PRIME - 1, PRIME - 2, 1]


def test_iterated_resultants():
    W = VarTable(["x", "t", "z0"])
    R = iterated_resultant_eliminate([P("x - t", W), P("z0 - x^2", W)], ["x"])
    assert R.canonical() == P("z0 - t^2", W).canonical()


def test_slice_eliminant_matches_known_polynomial():
    dup = duplicate(numerator_system(load("2const")))
    R = SliceEliminator(dup).eliminant()
    known = MultiPoly.parse("16*t^3*z0^3 - 8*t^3*z0^2 + t^3*z0 - 28*t^2*z0^2 + 19*t^2*z0 + t*z0^2 - t^2"
                            " + 11*t*z0 - 11*t - z0 + 1", R.vars)
    assert R.canonical() == known.canonical()
