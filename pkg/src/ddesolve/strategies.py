"""Resolution strategies, hypothesis diagnostics and degree bounds.

Two ways to get an annihilating polynomial R(t, z0) of F1(t, a):

* duplication: eliminate everything but (t, z0) from nk renamed copies of
  (E_1..E_n, Det, P) together with the non-degeneracy condition sat != 0;
* reduction: first collapse the E_i to one polynomial E in x1 by
  saturation and elimination, then duplicate (E, dE/dx1, dE/du).

Every returned R is checked against the fixed-point series.
"""

from __future__ import annotations

import hashlib
import logging
import time
from dataclasses import dataclass, field, replace
from math import factorial

from gmpy2 import mpq

from . import guess as gv
from .groebner import (Budget, BudgetExhausted, DegeneracyError, IdealPresentation, eliminate, fresh_name,
                       iterated_resultant_eliminate)
from .model import (DdeSystem, NumeratorSystem, duplicate, numerator_system, system_to_text)
from .modular import DegenerateSlices, SliceEliminator, UnluckySlice, primes
from .poly import DEGREVLEX, MultiPoly, StructureError, VarTable, squarefree_part
from .series import (eval_poly_at_series, fixed_point_expand, newton_root_count,
                     solution_bindings)
from . import upoly

log = logging.getLogger(__name__)

CONFIRMED, REFUTED, INCONCLUSIVE, ASSUMED = "confirmed", "refuted", "inconclusive", "assumed"
DEFAULT_ORDER = 60


# -- reports -----------------------------------------------------------------------


@dataclass
class Tri:
    """A tri-state verdict with the evidence behind it."""

    state: str
    value: object = None
    evidence: list = field(default_factory=list)

    def as_dict(self) -> dict:
        out = {"state": self.state, "evidence": [str(e) for e in self.evidence]}
        if self.value is not None:
            out["value"] = self.value
        return out


def _inconclusive(why: str) -> Tri:
    return Tri(INCONCLUSIVE, None, [why])


@dataclass
class HypothesisReport:
    h1_root_count: Tri = field(default_factory=lambda: _inconclusive("not checked"))
    h1_distinct: Tri = field(default_factory=lambda: _inconclusive("not checked"))
    h1_zero_dimensional: Tri = field(default_factory=lambda: _inconclusive("not checked"))
    h2_root_count: Tri = field(default_factory=lambda: _inconclusive("not checked"))
    h2_zero_dimensional: Tri = field(default_factory=lambda: _inconclusive("not checked"))
    principal: Tri = field(default_factory=lambda: _inconclusive("not checked"))
    radical: Tri = field(default_factory=lambda: Tri(ASSUMED, None, ["radicality is not decided"]))
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        names = ["h1_root_count", "h1_distinct", "h1_zero_dimensional", "h2_root_count",
                 "h2_zero_dimensional", "principal", "radical"]
        out = {name: getattr(self, name).as_dict() for name in names}
        out["notes"] = list(self.notes)
        return out


@dataclass
class AnnihilatorResult:
    R: MultiPoly
    strategy: str
    verified_to_order: int
    minimal_factor: MultiPoly | None = None
    minimal_provenance: str = ""
    method: str = ""
    diagnostics: HypothesisReport | None = None
    timings: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "method": self.method,
            "R": self.R.to_text(),
            "R_degrees": {"t": self.R.degree("t"), "z0": self.R.degree("z0")},
            "minimal_factor": None if self.minimal_factor is None else self.minimal_factor.to_text(),
            "minimal_provenance": self.minimal_provenance,
            "verified_to_order": self.verified_to_order,
            "hypotheses": None if self.diagnostics is None else self.diagnostics.as_dict(),
            "timings": {k: round(v, 3) for k, v in self.timings.items()},
            "details": self.details,
        }


class StrategyFailure(RuntimeError):
    """A strategy could not produce a verified R."""

    def __init__(self, message: str, report: HypothesisReport | None = None, kind: str = "budget"):
        super().__init__(message)
        self.report = report
        self.kind = kind  # "hypothesis" | "budget" | "degenerate"


class HypothesisFailure(StrategyFailure):
    def __init__(self, message: str, report: HypothesisReport | None = None):
        super().__init__(message, report, "hypothesis")


def input_digest(sys: DdeSystem) -> str:
    return hashlib.sha256(system_to_text(sys).encode()).hexdigest()


# -- degree bounds -----------------------------------------------------------------


def _floor_div(a: int, b: int) -> int:
    return a // b


def degree_bound_thm2(n: int, k: int, delta: int) -> tuple[int, int]:
    """(full-system bound, bound for the specialized series F1(t, a))."""
    if min(n, k, delta) < 1:
        raise ValueError("n, k and delta must be positive")
    e = n * n * k * k * (n + 2) + n
    full = _floor_div(n ** (2 * n * n * k * k) * (k + 1) ** e * delta ** e, factorial(n * k) ** (n * k))
    special = _floor_div(n ** (n * k) * (delta * (k + 1)) ** (n * k * (n + 2)), factorial(n * k))
    return full, special


def degree_bound_duplication(n: int, k: int, delta: int) -> int:
    if min(n, k, delta) < 1:
        raise ValueError("n, k and delta must be positive")
    return _floor_div(n ** (2 * n * k) * (delta * (k + 1) + 1) ** (n * k * (n + 2)), factorial(n * k))


# -- series helpers ----------------------------------------------------------------


def _series(sys: DdeSystem, N: int):
    return fixed_point_expand(sys, N)


def verify_on_series(R: MultiPoly, z0_series, N: int) -> bool:
    """R(t, F1(t, a)) = 0 mod t^N through the series engine."""
    v = eval_poly_at_series(R, {"z0": z0_series}, N)
    return all(c == 0 for c in v.t_coeffs())


def _specialized(poly: MultiPoly, sys: DdeSystem, exp, N: int):
    return eval_poly_at_series(poly, solution_bindings(sys, exp), N)


def _roots_tri(poly: MultiPoly, sys: DdeSystem, exp, N: int, need: int, what: str):
    D = _specialized(poly, sys, exp, N)
    if all(not c for c in D.coeffs):
        return Tri(INCONCLUSIVE, 0, [f"{what} vanishes identically on the solution"]), None
    diag = newton_root_count(D, center=sys.a)
    count = diag.root_count
    state = CONFIRMED if count == need else REFUTED
    ev = [f"{what}: {count} Puiseux root{'s' if count != 1 else ''}"
          f" {'=' if count == need else '<' if count < need else '>'} nk={need}"]
    return Tri(state, count, ev + list(diag.evidence)), diag


# -- hypotheses --------------------------------------------------------------------


def check_hypotheses(sys: DdeSystem, N: int = 24, ns: NumeratorSystem | None = None,
                     E: MultiPoly | None = None, slice_check: bool = True) -> HypothesisReport:
    """Runtime diagnostics for the kernel-method hypotheses.

    The root counts use the Newton polygon of the specialized Det (resp.
    dE/dx1).  Zero-dimensionality is tested on one random t-slice modulo a
    prime: a zero-dimensional slice bounds the generic fibre dimension.
    """
    ns = ns or numerator_system(sys)
    nk = sys.n * sys.k
    rep = HypothesisReport()
    exp = _series(sys, N)
    if ns.Det.is_constant():
        rep.h1_root_count = Tri(REFUTED, 0, ["Det is constant"])
        rep.notes.append("Q is identically zero: degenerate but solvable, F_i = f_i(u)")
        rep.h1_distinct = Tri(INCONCLUSIVE, None, ["no roots"])
        return rep
    tri, diag = _roots_tri(ns.Det, sys, exp, N, nk, "Det(u)=0")
    rep.h1_root_count = tri
    if diag is not None:
        rep.h1_distinct = Tri(CONFIRMED if diag.distinctness == "confirmed" else INCONCLUSIVE,
                              None, list(diag.evidence))
    if slice_check and tri.state == CONFIRMED:
        rep.h1_zero_dimensional = _slice_dimension(duplicate(ns))
    if E is not None:
        dE = E.deriv("x1")
        tri2, _ = _roots_tri(dE, sys, exp, N, nk, "d/dx1 E(u)=0")
        rep.h2_root_count = tri2
        rep.principal = Tri(CONFIRMED, None, ["single generator after elimination"])
    rep.notes.append("hypothesis (P) and smoothness are assumptions, never verified")
    return rep


def _slice_dimension(dup) -> Tri:
    try:
        se = SliceEliminator(dup)
    except StructureError as exc:
        return _inconclusive(str(exc))
    p = next(primes())
    for theta in (7, 11, 13):
        try:
            se.slice_minpoly(theta, p)
        except UnluckySlice as exc:
            last = str(exc)
            continue
        except BudgetExhausted:
            return _inconclusive("budget exhausted on the slice")
        dims = sorted(se.stats.dims)
        return Tri(CONFIRMED, dims[-1], [f"t={theta} slice mod {p} has {dims[-1]} solutions"])
    return _inconclusive(f"no zero-dimensional slice found ({last})")


# -- duplication -------------------------------------------------------------------


def _constant_case(sys: DdeSystem, N: int, start: float) -> AnnihilatorResult:
    vars = gv.GUESS_VARS
    value = sys.f[0].evaluate({"u": sys.a}) if not sys.f[0].is_zero() else mpq(0)
    R = MultiPoly.var(vars, "z0") - value
    rep = HypothesisReport()
    rep.notes.append("Q is identically zero: F_1 = f_1(u) and z0 = f_1(a)")
    return AnnihilatorResult(R, "duplication", N, R, "exact", "direct", rep,
                             {"total": time.monotonic() - start})


def _finish(R: MultiPoly, strategy: str, method: str, sys: DdeSystem, exp, N: int, rep, timings,
            start, details) -> AnnihilatorResult:
    R = R.to_vars(gv.GUESS_VARS).canonical()
    t0 = time.monotonic()
    z = exp.z(0)
    if not verify_on_series(R, z, N):
        raise StrategyFailure(f"{method} produced R that fails series verification")
    timings["verify"] = time.monotonic() - t0
    t0 = time.monotonic()
    bound = degree_bound_duplication(sys.n, sys.k, max(sys.delta, 1))
    mini = gv.minimal_annihilator(R, z, degree_bound=bound)
    timings["minimal"] = time.monotonic() - t0
    timings["total"] = time.monotonic() - start
    details = dict(details)
    details["degree_bound_duplication"] = str(bound)
    return AnnihilatorResult(R, strategy, N, mini.poly, mini.provenance, method, rep, timings, details)


def _eliminate(dup, budget: Budget, methods, details: dict):
    errors = []
    for method in methods:
        try:
            if method == "modular":
                se = SliceEliminator(dup, budget=budget)
                R = se.eliminant()
                details.update({"slices": se.stats.slices, "replayed_slices": se.stats.replayed,
                                "unlucky_slices": se.stats.unlucky, "primes": len(se.stats.primes),
                                "slice_solutions": sorted(se.stats.dims)})
                return R, "groebner-modular"
            if method == "groebner":
                keep = ["t", "z0"]
                pres = IdealPresentation(tuple(dup.equations) + (dup.rabinowitsch,), DEGREVLEX, dup.vars)
                blocks = [b for b in dup.default_blocks()[:-1]]
                el = eliminate(pres, keep, budget.child(), blocks=blocks)
                if not el.generators:
                    raise DegeneracyError("elimination ideal is zero")
                return min(el.generators, key=lambda g: (g.degree(), len(g))), "groebner-block"
            if method == "resultant":
                order = [v for v in dup.vars.names if v not in ("t", "z0", "m")]
                return iterated_resultant_eliminate(dup.equations, order, ("t", "z0"), budget.child()), "resultant"
            raise ValueError(f"unknown elimination method {method!r}")
        except (BudgetExhausted, DegeneracyError, DegenerateSlices, StructureError) as exc:
            log.info("%s elimination failed: %s", method, exc)
            errors.append(f"{method}: {exc}")
            if budget.expired():
                break
    raise StrategyFailure("; ".join(errors) or "budget exhausted")


def solve_by_duplication(sys: DdeSystem, budget: Budget | None = None, N: int = DEFAULT_ORDER,
                         methods=("modular", "resultant"), diagnose: bool = True) -> AnnihilatorResult:
    """Annihilating polynomial of F1(t, a) from the duplicated system."""
    start = time.monotonic()
    budget = (budget or Budget()).start()
    if all(q.is_zero() for q in sys.Q):
        return _constant_case(sys, N, start)
    timings = {}
    ns = numerator_system(sys)
    exp = _series(sys, N)
    timings["expand"] = time.monotonic() - start
    rep = HypothesisReport()
    if diagnose:
        t0 = time.monotonic()
        rep = check_hypotheses(sys, min(N, 24), ns, slice_check=False)
        timings["diagnose"] = time.monotonic() - t0
        if rep.h1_root_count.state == REFUTED:
            raise HypothesisFailure("H1 refuted: " + "; ".join(rep.h1_root_count.evidence)
                                    + " (try --deform)", rep)
    dup = duplicate(ns)
    t0 = time.monotonic()
    details = {}
    R, method = _eliminate(dup, budget, methods, details)
    timings["eliminate"] = time.monotonic() - t0
    if method == "groebner-modular":
        rep.h1_zero_dimensional = Tri(CONFIRMED, max(details["slice_solutions"]),
                                      ["every used t-slice is zero-dimensional"])
    return _finish(R, "duplication", method, sys, exp, N, rep, timings, start, details)


# -- reduction ---------------------------------------------------------------------


def _t_content_free(g: MultiPoly) -> MultiPoly:
    """Divide out the gcd in Q[t] of the coefficients of g in the other variables."""
    it = g.vars.index("t")
    groups = {}
    for e, c in g.terms.items():
        key = e[:it] + (0,) + e[it + 1:]
        row = groups.setdefault(key, [])
        while len(row) <= e[it]:
            row.append(mpq(0))
        row[e[it]] = c
    cont = None
    for row in groups.values():
        cont = upoly.trim(row) if cont is None else upoly.gcd(cont, row)
    if cont is None or len(cont) <= 1:
        return g.canonical()
    c = MultiPoly.from_univariate(g.vars, "t", cont)
    return g.exact_div(c).canonical()


@dataclass
class ReductionResult:
    principal: bool
    E: MultiPoly | None
    basis: tuple
    seconds: float = 0.0


def reduce_to_single_equation(sys: DdeSystem, budget: Budget | None = None,
                              ns: NumeratorSystem | None = None) -> ReductionResult:
    """Generator E of (<E_1..E_n> : Det^oo) restricted to x1, u, z, t."""
    if sys.n < 2:
        raise ValueError("reduction needs at least two unknown series")
    start = time.monotonic()
    budget = (budget or Budget()).start()
    ns = ns or numerator_system(sys)
    # saturation and elimination in one basis: {m, x2..xn} > {x1, u, z, t}
    m = fresh_name(ns.vars, "m")
    vars = VarTable([m] + list(ns.vars.names))
    drop = [m] + [v for v in ns.vars.names if v.startswith("x") and v != "x1"]
    keep = [v for v in ns.vars.names if v not in drop]
    gens = [e.to_vars(vars) for e in ns.E] + [MultiPoly.var(vars, m) * ns.Det.to_vars(vars) - 1]
    el = eliminate(IdealPresentation(tuple(gens), DEGREVLEX, vars), keep, budget.child())
    if not el.generators:
        raise DegeneracyError("the elimination ideal is zero")
    if any(g.is_constant() for g in el.generators):
        raise DegeneracyError("the saturated ideal is the unit ideal")
    gens = [_t_content_free(g) for g in el.generators]
    gens.sort(key=lambda g: (g.degree(), len(g)))
    E = gens[0]
    principal = all(E.divides(g) for g in gens[1:])
    return ReductionResult(principal, E if principal else None, tuple(gens), time.monotonic() - start)


def _reduced_numerator_system(ns: NumeratorSystem, E: MultiPoly) -> NumeratorSystem:
    vars = VarTable([v for v in ns.vars.names if not (v.startswith("x") and v != "x1")])
    return replace(ns, vars=vars, E=(E.to_vars(vars),), Det=None, P=None)


def solve_by_reduction(sys: DdeSystem, budget: Budget | None = None, N: int = DEFAULT_ORDER,
                       methods=("modular", "resultant")) -> AnnihilatorResult:
    """Annihilating polynomial from the single equation E (when H2 holds)."""
    start = time.monotonic()
    budget = (budget or Budget()).start()
    if sys.n == 1:
        res = solve_by_duplication(sys, budget, N, methods)
        res.strategy = "reduction"
        return res
    timings = {}
    ns = numerator_system(sys)
    exp = _series(sys, N)
    red = reduce_to_single_equation(sys, budget, ns)
    timings["reduce"] = red.seconds
    rep = HypothesisReport()
    if not red.principal:
        rep.principal = Tri(REFUTED, len(red.basis), [g.to_text() for g in red.basis])
        raise HypothesisFailure("the saturated elimination ideal is not principal", rep)
    E = red.E.to_vars(ns.vars)
    rep.principal = Tri(CONFIRMED, 1, [E.to_text()])
    nk = sys.n * sys.k
    tri, _ = _roots_tri(E.deriv("x1"), sys, exp, min(N, 24), nk, "d/dx1 E(u)=0")
    rep.h2_root_count = tri
    if tri.state != CONFIRMED:
        raise HypothesisFailure("H2 refuted: " + tri.evidence[0], rep)
    rns = _reduced_numerator_system(ns, E)
    rE = rns.E[0]
    dup = duplicate(rns, polys=(rE, rE.deriv("x1"), rE.deriv("u")))
    t0 = time.monotonic()
    details = {"E": E.to_text()}
    R, method = _eliminate(dup, budget, methods, details)
    timings["eliminate"] = time.monotonic() - t0
    return _finish(R, "reduction", method, sys, exp, N, rep, timings, start, details)


# -- comparison ----------------------------------------------------------------------


@dataclass
class Comparison:
    divides: bool
    quotient: MultiPoly | None
    sqf1: MultiPoly
    sqf2: MultiPoly

    def as_dict(self) -> dict:
        return {"divides": self.divides,
                "quotient": None if self.quotient is None else self.quotient.to_text(),
                "sqfree_R1": self.sqf1.to_text(), "sqfree_R2": self.sqf2.to_text()}


def compare_strategies(r1, r2) -> Comparison:
    """Does SqFree(R2) divide SqFree(R1)?  Accepts results or polynomials."""
    p1 = r1.R if isinstance(r1, AnnihilatorResult) else r1
    p2 = r2.R if isinstance(r2, AnnihilatorResult) else r2
    p1 = p1.to_vars(gv.GUESS_VARS)
    p2 = p2.to_vars(gv.GUESS_VARS)
    s1 = squarefree_part(p1, "t", "z0")
    s2 = squarefree_part(p2, "t", "z0")
    try:
        q = s1.exact_div(s2)
    except ArithmeticError:
        return Comparison(False, None, s1, s2)
    return Comparison(True, q, s1, s2)


# -- guessing as a strategy ------------------------------------------------------------


def solve_by_guessing(sys: DdeSystem, N: int = DEFAULT_ORDER, bounds=(6, 6)) -> AnnihilatorResult:
    start = time.monotonic()
    exp = _series(sys, N)
    G = exp.z(0)
    Dt, Dz = bounds
    while (Dt + 1) * (Dz + 1) + 10 > N and Dt > 0:
        Dt -= 1
    R = gv.guess_annihilator(gv.GuessSpec(G, Dt, Dz))
    if R is None:
        raise StrategyFailure("no annihilator within the guessing bounds")
    bound = degree_bound_duplication(sys.n, sys.k, max(sys.delta, 1))
    prov = gv.provenance(R.degree("t"), R.degree("z0"), N, bound)
    return AnnihilatorResult(R, "guess", N, R, prov, "hermite-pade", None,
                             {"total": time.monotonic() - start}, {"bounds": [Dt, Dz]})


def solve_auto(sys: DdeSystem, budget: Budget | None = None, N: int = DEFAULT_ORDER) -> AnnihilatorResult:
    """Reduction first, duplication on its failure, guessing last."""
    budget = (budget or Budget()).start()
    failures = []
    if sys.n >= 2:
        try:
            return solve_by_reduction(sys, Budget(seconds=min(60.0, budget.remaining() or 60.0)), N)
        except (StrategyFailure, BudgetExhausted, DegeneracyError) as exc:
            failures.append(f"reduction: {exc}")
    try:
        res = solve_by_duplication(sys, budget.child(), N)
        res.details["fallbacks"] = failures
        return res
    except (StrategyFailure, BudgetExhausted, DegeneracyError) as exc:
        failures.append(f"duplication: {exc}")
    res = solve_by_guessing(sys, N)
    res.details["fallbacks"] = failures
    return res
