"""Guess annihilating polynomials from series data and check them.

This module deliberately does its own truncated series arithmetic on plain
lists of rationals so that it stays independent of the series engine it is
used to cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from math import gcd as igcd

from gmpy2 import mpq, mpz

from .poly import MultiPoly, VarTable

GUESS_VARS = VarTable(["t", "z0"])


class InsufficientOrder(ValueError):
    """The series is too short for the requested degree bounds."""


@dataclass
class GuessSpec:
    series: list
    Dt: int
    Dz: int
    margin: int = 10

    def __post_init__(self):
        self.series = _coeff_list(self.series)
        if self.margin < 10:
            raise ValueError("verification margin must be at least 10")

    @property
    def required_order(self) -> int:
        return (self.Dt + 1) * (self.Dz + 1) + self.margin


@dataclass
class Verification:
    ok: bool
    order: int
    first_failure: int | None = None
    coefficient: mpq | None = None

    def __bool__(self):
        return self.ok


@dataclass
class MinimalAnnihilator:
    poly: MultiPoly
    minimal: bool
    divides: bool
    verified_to: int
    quotient: MultiPoly | None = None
    provenance: str = "conjectural"
    tried: list = field(default_factory=list)


def _coeff_list(series) -> list:
    if hasattr(series, "t_coeffs"):
        return list(series.t_coeffs())
    return [mpq(c) for c in series]


def _mul_trunc(a, b, N):
    out = [mpq(0)] * N
    for i, x in enumerate(a[:N]):
        if not x:
            continue
        for j in range(min(len(b), N - i)):
            y = b[j]
            if y:
                out[i + j] += x * y
    return out


def _powers(G, D, N):
    out = [[mpq(1)] + [mpq(0)] * (N - 1)]
    for _ in range(D):
        out.append(_mul_trunc(out[-1], G, N))
    return out


# -- evaluation ------------------------------------------------------------------


def evaluate_at_series(R: MultiPoly, series, N: int, z: str = "z0", t: str = "t") -> list:
    """Coefficients of R(t, G(t)) modulo t^N, by Horner in z."""
    G = _coeff_list(series)
    if len(G) < N:
        raise InsufficientOrder(f"series known to order {len(G)}, need {N}")
    G = G[:N]
    iz, it = R.vars.index(z), R.vars.index(t)
    for e in R.terms:
        if any(x for i, x in enumerate(e) if i not in (iz, it)):
            raise ValueError("annihilator candidates may only involve t and z0")
    by_z = {}
    for e, c in R.terms.items():
        row = by_z.setdefault(e[iz], [mpq(0)] * N)
        if e[it] < N:
            row[e[it]] += c
    acc = [mpq(0)] * N
    for d in range(max(by_z, default=0), -1, -1):
        acc = _mul_trunc(acc, G, N)
        row = by_z.get(d)
        if row is not None:
            acc = [x + y for x, y in zip(acc, row)]
    return acc


def verify_annihilator(R: MultiPoly, series, N: int) -> Verification:
    """Check R(t, G) = 0 mod t^N, reporting the first nonzero order."""
    if not R:
        raise ValueError("the zero polynomial annihilates everything")
    vals = evaluate_at_series(R, series, N)
    for i, c in enumerate(vals):
        if c:
            return Verification(False, N, i, c)
    return Verification(True, N)


# -- exact nullspace -------------------------------------------------------------


def _integer_rows(rows):
    out = []
    for r in rows:
        den = reduce(lambda a, b: a * b // igcd(a, b), (int(x.denominator) for x in r), 1)
        out.append([mpz(x * den) for x in r])
    return out


def nullspace_vector(rows, ncols: int):
    """One nonzero kernel vector of an integer matrix, or None.

    Fraction-free (Bareiss) elimination with partial pivoting on the
    largest magnitude; the kernel vector is read off by back substitution.
    """
    A = [list(r) for r in rows]
    m = len(A)
    pivots = []
    prev = mpz(1)
    r = 0
    for c in range(ncols):
        best = None
        for i in range(r, m):
            if A[i][c] and (best is None or abs(A[i][c]) > abs(A[best][c])):
                best = i
        if best is None:
            continue
        A[r], A[best] = A[best], A[r]
        pr = A[r]
        piv = pr[c]
        for i in range(r + 1, m):
            row = A[i]
            f = row[c]
            for j in range(c, ncols):
                row[j] = (piv * row[j] - f * pr[j]) // prev
        prev = piv
        pivots.append(c)
        r += 1
        if r == m:
            break
    free = [c for c in range(ncols) if c not in pivots]
    if not free:
        return None
    x = [mpq(0)] * ncols
    x[free[0]] = mpq(1)
    for idx in range(len(pivots) - 1, -1, -1):
        c = pivots[idx]
        row = A[idx]
        s = sum((row[j] * x[j] for j in range(c + 1, ncols) if row[j] and x[j]), mpq(0))
        x[c] = -s / row[c]
    return x


def _guess_exact(G, powers, Dt: int, Dz: int, N: int):
    cols = [(i, j) for j in range(Dz + 1) for i in range(Dt + 1)]
    rows = []
    for r in range(N):
        rows.append([powers[j][r - i] if r >= i else mpq(0) for i, j in cols])
    vec = nullspace_vector(_integer_rows(rows), len(cols))
    if vec is None:
        return None
    terms = {(i, j): v for (i, j), v in zip(cols, vec) if v}
    R = MultiPoly(GUESS_VARS, terms)
    if R.degree("z0") < 1:
        return None
    return R.canonical()


def guess_annihilator(spec: GuessSpec):
    """Smallest (in D_z, then D_t) annihilator within the bounds, or None."""
    G = spec.series
    N = len(G)
    if N < spec.required_order:
        raise InsufficientOrder(f"need order {spec.required_order}, series has {N}")
    powers = _powers(G, spec.Dz, N)
    for Dz in range(1, spec.Dz + 1):
        for Dt in range(spec.Dt + 1):
            R = _guess_exact(G, powers, Dt, Dz, N)
            if R is not None:
                return R
    return None


def provenance(Dt: int, Dz: int, N: int, bound: int | None) -> str:
    """Certified when N exceeds (b+1)^2 for a proven degree bound b."""
    if bound is not None and Dz <= bound and Dt <= bound and N > (bound + 1) * (bound + 1):
        return "certified"
    return "conjectural"


def minimal_annihilator(R: MultiPoly, series, bounds=None, degree_bound: int | None = None) -> MinimalAnnihilator:
    """Smallest guessed divisor of an eliminated R that annihilates the series.

    ``bounds`` caps (D_t, D_z); by default the degrees of R are used.  Each
    candidate must divide R exactly and verify on the whole series.
    """
    G = _coeff_list(series)
    N = len(G)
    R = R.to_vars(GUESS_VARS) if R.vars != GUESS_VARS else R
    dt, dz = R.degree("t"), R.degree("z0")
    if bounds is not None:
        dt, dz = min(dt, bounds[0]), min(dz, bounds[1])
    base = verify_annihilator(R, G, N)
    if not base:
        raise ValueError(f"R does not annihilate the series (order {base.first_failure})")
    tried = []
    powers = _powers(G, dz, N)
    for Dz in range(1, dz + 1):
        for Dt in range(dt + 1):
            if (Dt + 1) * (Dz + 1) + 10 > N:
                break
            cand = _guess_exact(G, powers, Dt, Dz, N)
            if cand is None:
                continue
            tried.append((Dt, Dz))
            try:
                q = R.exact_div(cand)
            except ArithmeticError:
                continue
            if verify_annihilator(cand, G, N):
                return MinimalAnnihilator(cand, True, True, N, q,
                                          provenance(Dt, Dz, N, degree_bound), tried)
    return MinimalAnnihilator(R.canonical(), False, True, N, MultiPoly.const(GUESS_VARS, 1), "eliminated", tried)
