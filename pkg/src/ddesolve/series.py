"""Truncated power series in t with polynomial-in-u coefficients.

A :class:`USeries` stores ``N`` coefficients ``c_0 .. c_{N-1}``; each is a
dense :mod:`upoly` list in u.  Univariate series in t are the special case
where every coefficient is constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial, gcd
from typing import Mapping, Sequence

from gmpy2 import mpq

from . import upoly
from .poly import MultiPoly, StructureError


class PrecisionError(ArithmeticError):
    """The available series precision is too low to decide; raise N."""


class USeries:
    __slots__ = ("N", "coeffs")

    def __init__(self, coeffs: Sequence, N: int | None = None):
        coeffs = [upoly.trim([mpq(x) for x in c]) for c in coeffs]
        if N is None:
            N = len(coeffs)
        if len(coeffs) > N:
            coeffs = coeffs[:N]
        coeffs += [[] for _ in range(N - len(coeffs))]
        self.N = N
        self.coeffs = coeffs

    @classmethod
    def _raw(cls, coeffs, N):
        s = cls.__new__(cls)
        s.N = N
        s.coeffs = coeffs
        return s

    @classmethod
    def constant(cls, c, N: int) -> "USeries":
        return cls([[c]], N)

    @classmethod
    def from_t(cls, values: Sequence, N: int | None = None) -> "USeries":
        """Univariate series from a list of rational t-coefficients."""
        return cls([[v] for v in values], N)

    @classmethod
    def from_poly(cls, p: MultiPoly, N: int, t: str = "t", u: str = "u") -> "USeries":
        """Expand a polynomial in t and u (other variables forbidden)."""
        extra = [v for v in p.used_vars() if v not in (t, u)]
        if extra:
            raise StructureError(f"unbound variables {extra}")
        it = p.vars.index(t) if t in p.vars else None
        iu = p.vars.index(u) if u in p.vars else None
        out = [[] for _ in range(N)]
        for e, c in p.terms.items():
            j = e[it] if it is not None else 0
            if j >= N:
                continue
            d = e[iu] if iu is not None else 0
            row = out[j]
            if len(row) <= d:
                row.extend([mpq(0)] * (d + 1 - len(row)))
            row[d] += c
        return cls._raw([upoly.trim(r) for r in out], N)

    # protocol -----------------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, USeries):
            return NotImplemented
        n = min(self.N, other.N)
        return self.coeffs[:n] == other.coeffs[:n]

    def __repr__(self):
        return f"USeries({self})"

    def __str__(self):
        return self.to_text()

    def is_univariate(self) -> bool:
        return all(len(c) <= 1 for c in self.coeffs)

    def t_coeffs(self) -> list:
        """Rational t-coefficients of a univariate series."""
        if not self.is_univariate():
            raise StructureError("series still depends on u")
        return [c[0] if c else mpq(0) for c in self.coeffs]

    def valuation(self):
        for j, c in enumerate(self.coeffs):
            if c:
                return j
        return None

    def truncate(self, N: int) -> "USeries":
        N = min(N, self.N)
        return USeries._raw(self.coeffs[:N], N)

    def to_text(self, t: str = "t", u: str = "u") -> str:
        parts = []
        for j, c in enumerate(self.coeffs):
            if not c:
                continue
            cs = _upoly_text(c, u)
            tp = "" if j == 0 else (t if j == 1 else f"{t}^{j}")
            if not tp:
                parts.append(cs)
            elif len(c) == 1:
                a = c[0]
                if a == 1:
                    parts.append(tp)
                elif a == -1:
                    parts.append("-" + tp)
                else:
                    parts.append(f"{_num(a)}*{tp}")
            else:
                parts.append(f"({cs})*{tp}")
        tail = f"O({t})" if self.N == 1 else f"O({t}^{self.N})"
        if not parts:
            return tail
        text = parts[0]
        for p in parts[1:]:
            text += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return f"{text} + {tail}"

    def to_arrays(self) -> list:
        """Machine-readable dump: per t-power, the u-coefficients as strings."""
        return [[_num(x) for x in c] for c in self.coeffs]

    # arithmetic -----------------------------------------------------------------

    def _lift(self, other):
        if isinstance(other, USeries):
            return other
        return USeries.constant(other, self.N)

    def __add__(self, other):
        other = self._lift(other)
        N = min(self.N, other.N)
        return USeries._raw([upoly.add(a, b) for a, b in zip(self.coeffs[:N], other.coeffs[:N])], N)

    __radd__ = __add__

    def __neg__(self):
        return USeries._raw([[-x for x in c] for c in self.coeffs], self.N)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, USeries):
            c = mpq(other)
            return USeries._raw([upoly.scale(x, c) for x in self.coeffs], self.N)
        N = min(self.N, other.N)
        out = []
        a, b = self.coeffs, other.coeffs
        for n in range(N):
            acc = []
            for j in range(n + 1):
                if a[j] and b[n - j]:
                    acc = upoly.add(acc, upoly.mul(a[j], b[n - j]))
            out.append(acc)
        return USeries._raw(out, N)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        result = USeries.constant(1, self.N)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def shift_t(self, s: int) -> "USeries":
        """Multiply by t^s."""
        return USeries._raw([[] for _ in range(s)] + self.coeffs[: self.N - s], self.N)

    def mul_upoly(self, p) -> "USeries":
        return USeries._raw([upoly.mul(c, p) for c in self.coeffs], self.N)

    def subs_u(self, value) -> "USeries":
        """Substitute a rational number for u."""
        return USeries._raw([upoly.trim([upoly.evaluate(c, value)]) if c else [] for c in self.coeffs], self.N)


def _num(x) -> str:
    x = mpq(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _upoly_text(c, u):
    terms = []
    for d in range(len(c) - 1, -1, -1):
        a = c[d]
        if not a:
            continue
        mono = "" if d == 0 else (u if d == 1 else f"{u}^{d}")
        if not mono:
            terms.append(_num(a))
        elif a == 1:
            terms.append(mono)
        elif a == -1:
            terms.append("-" + mono)
        else:
            terms.append(f"{_num(a)}*{mono}")
    text = terms[0]
    for p in terms[1:]:
        text += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
    return text


# -- discrete derivative and specialization ----------------------------------


def delta_poly(c, a):
    """(c(u) - c(a)) / (u - a) for a dense u-polynomial."""
    if len(c) <= 1:
        return []
    # synthetic division by (u - a); remainder is c(a)
    out = [mpq(0)] * (len(c) - 1)
    acc = mpq(0)
    for d in range(len(c) - 1, 0, -1):
        acc = acc * a + c[d]
        out[d - 1] = acc
    return upoly.trim(out)


def delta_a(F: USeries, a) -> USeries:
    """Coefficientwise discrete derivative (F(t,u) - F(t,a)) / (u - a)."""
    a = mpq(a)
    return USeries._raw([delta_poly(c, a) for c in F.coeffs], F.N)


def specialize(F: USeries, a, ell: int = 0) -> USeries:
    """Coefficientwise l-th u-derivative evaluated at u = a."""
    if ell < 0:
        raise ValueError("derivative order must be nonnegative")
    a = mpq(a)
    out = []
    for c in F.coeffs:
        for _ in range(ell):
            c = upoly.deriv(c)
        out.append([upoly.evaluate(c, a)] if c else [])
    return USeries._raw([upoly.trim(x) for x in out], F.N)


# -- evaluation of polynomials on series ---------------------------------------


def eval_poly_at_series(P: MultiPoly, bindings: Mapping[str, object], N: int,
                        t: str = "t", u: str = "u") -> USeries:
    """Evaluate ``P`` with variables bound to series or numbers.

    ``t`` and ``u`` bind to themselves unless given in ``bindings``.
    """
    idx_series = {}
    for name, val in bindings.items():
        if name not in P.vars:
            continue
        i = P.vars.index(name)
        if isinstance(val, USeries):
            idx_series[i] = val.truncate(N)
            N = min(N, val.N)
        else:
            idx_series[i] = USeries.constant(mpq(val), N)
    it = P.vars.index(t) if t in P.vars and P.vars.index(t) not in idx_series else None
    iu = P.vars.index(u) if u in P.vars and P.vars.index(u) not in idx_series else None
    for name in P.used_vars():
        i = P.vars.index(name)
        if i not in idx_series and i != it and i != iu:
            raise StructureError(f"variable {name!r} is not bound")
    idx_series = {i: s.truncate(N) for i, s in idx_series.items()}
    powers: dict = {}

    def power(i, d):
        key = (i, d)
        if key not in powers:
            powers[key] = idx_series[i] if d == 1 else power(i, d - 1) * idx_series[i]
        return powers[key]

    # group terms by the bound-variable part so each product is formed once
    groups: dict = {}
    for e, c in P.terms.items():
        bound = tuple((i, e[i]) for i in sorted(idx_series) if e[i])
        j = e[it] if it is not None else 0
        d = e[iu] if iu is not None else 0
        if j >= N:
            continue
        row = groups.setdefault(bound, {})
        poly = row.setdefault(j, [])
        if len(poly) <= d:
            poly.extend([mpq(0)] * (d + 1 - len(poly)))
        poly[d] += c
    total = USeries._raw([[] for _ in range(N)], N)
    for bound, rows in groups.items():
        mult = USeries._raw([upoly.trim(list(rows.get(j, []))) for j in range(N)], N)
        prod = mult
        for i, d in bound:
            prod = prod * power(i, d)
        total = total + prod
    return total


# -- fixed-point expansion ----------------------------------------------------------


@dataclass
class Expansion:
    """Solution series F_1..F_n and the specializations at the catalytic point."""

    F: list
    specializations: dict = field(default_factory=dict)

    def z(self, index: int) -> USeries:
        return self.specializations[f"z{index}"]


class _Lazy:
    """Online series whose coefficients are produced on demand."""

    __slots__ = ("coeffs", "produce")

    def __init__(self, produce):
        self.coeffs = []
        self.produce = produce

    def get(self, n):
        while len(self.coeffs) <= n:
            self.coeffs.append(self.produce(len(self.coeffs)))
        return self.coeffs[n]


def fixed_point_expand(sys, N: int, order: str = "forward") -> Expansion:
    """Unique solution of ``F_i = f_i(u) + t*Q_i(...)`` truncated at t^N.

    Coefficients are produced one t-power at a time: the t^n coefficient of
    each right side only depends on coefficients below n.  ``order``
    ("forward" or "reverse") changes the evaluation order of the unknowns and
    exists to check that the result does not depend on it.
    """
    n, k, a = sys.n, sys.k, mpq(sys.a)
    qvars = sys.qvars
    iu = qvars.index("u")
    it = qvars.index("t")
    iy = [[qvars.index(sys.yname(i, j)) for j in range(k + 1)] for i in range(n)]
    extra = [v for q in sys.Q for v in q.used_vars() if v not in ("t", "u") and not v.startswith("y")]
    if extra:
        raise StructureError(f"right-hand sides involve unbound symbols {sorted(set(extra))}")
    F = [[] for _ in range(n)]  # F[i][j] = coefficient list of t^j of F_i
    D = [[[] for _ in range(k + 1)] for _ in range(n)]  # D[i][j] = coefficients of Delta^j F_i

    def dcoef(i, j, m):
        col = D[i][j]
        while len(col) <= m:
            mm = len(col)
            base = F[i][mm] if j == 0 else dcoef(i, j - 1, mm)
            col.append(base if j == 0 else delta_poly(base, a))
        return col[m]

    # each monomial of Q_i in the y's becomes a chain of lazy products
    plans = []
    for q in sys.Q:
        groups: dict = {}
        for e, c in q.terms.items():
            ys = []
            for i in range(n):
                for j in range(k + 1):
                    ys.extend([(i, j)] * e[iy[i][j]])
            key = tuple(ys)
            poly = groups.setdefault(key, {}).setdefault(e[it], [])
            d = e[iu]
            if len(poly) <= d:
                poly.extend([mpq(0)] * (d + 1 - len(poly)))
            poly[d] += c
        chains = []
        for ys, tcoef in groups.items():
            prods = []
            for r, (i, j) in enumerate(ys):
                if r == 0:
                    prods.append(_Lazy(lambda m, i=i, j=j: dcoef(i, j, m)))
                else:
                    prev = prods[-1]
                    prods.append(_Lazy(lambda m, prev=prev, i=i, j=j: _conv_at(prev, lambda l: dcoef(i, j, l), m)))
            tpolys = {s: upoly.trim(p) for s, p in tcoef.items()}
            chains.append((prods[-1] if prods else None, tpolys))
        plans.append(chains)

    def rhs_coef(i, m):
        # coefficient of t^m in Q_i
        acc = []
        for prod, tpolys in plans[i]:
            for s, up in tpolys.items():
                if s > m or not up:
                    continue
                if prod is None:
                    if s == m:
                        acc = upoly.add(acc, up)
                else:
                    c = prod.get(m - s)
                    if c:
                        acc = upoly.add(acc, upoly.mul(up, c))
        return acc

    idx = list(range(n)) if order == "forward" else list(range(n - 1, -1, -1))
    f_coeffs = [_upoly_of(fi) for fi in sys.f]
    for m in range(N):
        new = {}
        for i in idx:
            new[i] = f_coeffs[i] if m == 0 else rhs_coef(i, m - 1)
        for i in range(n):
            F[i].append(upoly.trim(list(new[i])))
    series = [USeries._raw(F[i][:N], N) for i in range(n)]
    spec = {}
    for i in range(n):
        for ell in range(k):
            spec[f"z{i * k + ell}"] = specialize(series[i], a, ell)
    return Expansion(series, spec)


def _conv_at(prev: _Lazy, right, m):
    acc = []
    for j in range(m + 1):
        x = prev.get(j)
        if not x:
            continue
        y = right(m - j)
        if y:
            acc = upoly.add(acc, upoly.mul(x, y))
    return acc


def _upoly_of(p: MultiPoly):
    if p.is_zero():
        return []
    used = p.used_vars()
    if any(v != "u" for v in used):
        raise StructureError("f_i must be a polynomial in u")
    iu = p.vars.index("u") if "u" in p.vars else None
    out = [mpq(0)] * (p.degree("u") + 1 if iu is not None else 1)
    for e, c in p.terms.items():
        out[e[iu] if iu is not None else 0] += c
    return upoly.trim(out)


def solution_bindings(sys, exp: Expansion) -> dict:
    """Bindings x_i -> F_i(t,u) and z_j -> specializations, for numerator polynomials."""
    out = {f"x{i + 1}": exp.F[i] for i in range(sys.n)}
    out.update(exp.specializations)
    return out


# -- Newton polygon diagnostics --------------------------------------------------------


@dataclass
class PuiseuxDiagnostic:
    root_count: int
    leading_terms: list
    distinctness: str  # "confirmed" | "inconclusive"
    evidence: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "root_count": self.root_count,
            "leading_terms": [[str(e), d] for e, d in self.leading_terms],
            "distinctness": self.distinctness,
            "evidence": list(self.evidence),
        }


def series_to_grid(D: USeries, center=0):
    """Coefficient grid g[i][j] of v^i t^j for D(t, center + v)."""
    center = mpq(center)
    cols = [upoly.shift(c, center) if center else list(c) for c in D.coeffs]
    deg = max((len(c) for c in cols), default=0)
    grid = [[mpq(0)] * D.N for _ in range(deg)]
    for j, c in enumerate(cols):
        for i, x in enumerate(c):
            grid[i][j] = x
    return grid, D.N


def _valuations(grid, N):
    vals = []
    for row in grid:
        v = next((j for j in range(N) if row[j]), None)
        vals.append(v)
    return vals


def _lower_hull(points):
    """Lower convex hull of (i, v) points sorted by i."""
    hull = []
    for p in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (p[0] - x1) >= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def newton_root_count(D: USeries, min_precision: int = 1, center=0, max_depth: int = 6) -> PuiseuxDiagnostic:
    """Count roots v(t) -> 0 (v != 0) of D(t, center + v) via the Newton polygon.

    Distinctness is confirmed when every positive-slope segment has a
    squarefree characteristic polynomial; rational repeated roots are
    followed through a bounded number of refinement steps (v = t^l (c + w)).
    """
    if D.N < min_precision:
        raise PrecisionError(f"series precision {D.N} below required {min_precision}")
    grid, N = series_to_grid(D, center)
    return _diagnose(grid, N, 1, max_depth)


def _diagnose(grid, N, q, depth):
    # N: precision in t (or in s where t = s^q)
    vals = _valuations(grid, N)
    known = [(i, v) for i, v in enumerate(vals) if v is not None]
    if not known:
        raise PrecisionError("all coefficients vanish to the available precision")
    mu = min(v for _, v in known)
    istar = min(i for i, v in known if v == mu)
    i0 = known[0][0]
    evidence = []
    if i0 > 0:
        evidence.append(f"coefficients of v^0..v^{i0 - 1} vanish to precision (root at v=0 excluded)")
    count = istar - i0
    if count <= 0:
        return PuiseuxDiagnostic(0, [], "confirmed", evidence)
    pts = [(i, v - mu) for i, v in known if i <= istar]
    hull = _lower_hull(pts)
    leading = []
    distinct = "confirmed"
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        width = x2 - x1
        slope = Fraction(y1 - y2, width)  # root valuation in t^(1/q) units
        if slope <= 0:
            continue
        leading.append((slope / q, width))
        # characteristic polynomial: points lying on the segment
        on = {}
        for i, v in pts:
            if x1 <= i <= x2 and (v - y1) * width == (y2 - y1) * (i - x1):
                on[i] = grid[i][v + mu]
        den = slope.denominator
        char = [mpq(0)] * (width // den + 1)
        for i, c in on.items():
            char[(i - x1) // den] += c
        char = upoly.trim(char)
        g = upoly.gcd(char, upoly.deriv(char))
        if len(g) <= 1:
            continue
        if depth <= 0:
            distinct = "inconclusive"
            evidence.append(f"segment of slope {slope / q}: repeated root, refinement depth exhausted")
            continue
        roots = _rational_roots(g)
        sqf_g = upoly.divmod_(g, upoly.gcd(g, upoly.deriv(g)))[0]
        if sum(1 for _ in roots) != len(sqf_g) - 1:
            distinct = "inconclusive"
            evidence.append(f"segment of slope {slope / q}: repeated irrational leading coefficient")
            continue
        for r in roots:
            # leading coefficient of v is the root in the variable w = v^den / t^...
            if den != 1:
                distinct = "inconclusive"
                evidence.append(f"segment of slope {slope / q}: repeated root on a ramified segment")
                continue
            sub = _refine(grid, N, mu, slope, r, q)
            if sub is None:
                distinct = "inconclusive"
                evidence.append(f"segment of slope {slope / q}: precision too low to refine")
                continue
            sgrid, sN, sq = sub
            try:
                inner = _diagnose(sgrid, sN, sq, depth - 1)
            except PrecisionError:
                distinct = "inconclusive"
                evidence.append(f"segment of slope {slope / q}: precision too low to refine")
                continue
            mult = _multiplicity(char, r)
            vals2 = _valuations(sgrid, sN)
            zero_root = next((i for i, v in enumerate(vals2) if v is not None), 0)
            if zero_root > 1 or inner.distinctness != "confirmed" or inner.root_count + zero_root != mult:
                distinct = "inconclusive"
                evidence.append(f"segment of slope {slope / q}: refinement at c={r} did not separate the roots")
            else:
                evidence.append(f"segment of slope {slope / q}: repeated leading coefficient {r} separated at next order")
    return PuiseuxDiagnostic(count, leading, distinct, evidence)


def _multiplicity(p, r):
    m = 0
    while p and upoly.evaluate(p, r) == 0:
        p = upoly.divmod_(p, [-r, mpq(1)])[0]
        m += 1
    return m


def _rational_roots(p):
    """Distinct rational roots of a QQ polynomial (rational root theorem)."""
    p = [mpq(c) for c in p]
    den = 1
    for c in p:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in p]
    while ints and ints[0] == 0:
        ints = ints[1:]
    roots = []
    if any(c == 0 for c in p[:1]):
        roots.append(mpq(0))
    a0, an = abs(ints[0]), abs(ints[-1])
    if len(ints) == 1:
        return roots
    for num in _divisors(a0):
        for d in _divisors(an):
            for s in (1, -1):
                r = mpq(s * num, d)
                if r not in roots and upoly.evaluate(p, r) == 0:
                    roots.append(r)
    return roots


def _divisors(n):
    n = abs(n)
    if n == 0:
        return [0]
    small = [d for d in range(1, int(n ** 0.5) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def _refine(grid, N, mu, slope, c, q):
    """Substitute v = t^slope (c + w) with integral slope; returns the new grid."""
    lam = int(slope)
    deg = len(grid)
    # new coefficient of w^m t^j: sum_i grid[i][j - lam*i] * C(i, m) c^(i-m)
    # precision of the i-th contribution is N + lam*i >= N
    out = [[mpq(0)] * (N + lam * deg) for _ in range(deg)]
    for i in range(deg):
        row = grid[i]
        for m in range(i + 1):
            f = comb(i, m) * c ** (i - m)
            if not f:
                continue
            for j in range(N):
                x = row[j]
                if x:
                    out[m][j + lam * i] += f * x
    newN = N  # only orders below N are complete for every i
    out = [r[:newN] for r in out]
    vals = [next((j for j in range(newN) if r[j]), None) for r in out]
    known = [v for v in vals if v is not None]
    if not known:
        return None
    low = min(known)
    out = [r[low:] for r in out]
    return out, newN - low, q
