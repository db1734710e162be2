"""Elimination of a duplicated system by evaluation and interpolation.

The parameter t is fixed to small integers theta and the coefficients are
taken modulo word-size primes.  Each slice is then a zero-dimensional
system whose degrevlex basis is cheap.  The eliminant in z0 of the slice
is the minimal polynomial of multiplication by z0 on the quotient ring.
Its coefficients are rational functions of t, recovered by rational
function reconstruction, and the primes are combined by Chinese
remaindering followed by rational number reconstruction.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpq

from . import upoly
from .groebner import (Budget, BudgetExhausted, IdealPresentation, ReplayMismatch, Ring, Trace,
                       _Reducer, buchberger, groebner_internal)
from .poly import DEGREVLEX, MultiPoly, StructureError, VarTable

log = logging.getLogger(__name__)

PRIME_START = 1 << 61


class UnluckySlice(ArithmeticError):
    """The slice is degenerate (positive dimension or a dropped degree)."""


class DegenerateSlices(ArithmeticError):
    """Every tried slice was degenerate: the system itself is."""


def primes(start: int = PRIME_START):
    """Increasing sequence of primes above ``start``."""
    q = int(gmpy2.next_prime(start))
    while True:
        yield q
        q = int(gmpy2.next_prime(q))


@dataclass
class SliceStats:
    slices: int = 0
    unlucky: int = 0
    replayed: int = 0
    pairs: int = 0
    seconds: float = 0.0
    primes: list = field(default_factory=list)
    dims: set = field(default_factory=set)


def minimal_polynomial(ring: Ring, basis, var: str, p: int, max_degree: int = 2000):
    """Minimal polynomial (monic, low to high) of ``var`` on R/<basis> mod p."""
    red = _Reducer(ring, p)
    red.polys = list(basis)
    red.active = list(range(len(basis)))
    e = [0] * ring.n
    e[ring.vars.index(var)] = 1
    xk, xm = ring.key(e), ring.pack(e)
    rows = {}  # pivot key -> (vector, combination)
    cur = [(0, 0, 1)]
    for i in range(max_degree + 1):
        nf = red.reduce(cur, monic=False)
        vec = {k: c for k, _, c in nf}
        combo = {i: 1}
        while vec:
            k = max(vec)
            row = rows.get(k)
            if row is None:
                break
            c = vec[k]
            rv, rc = row
            for kk, v in rv.items():
                x = (vec.get(kk, 0) - c * v) % p
                if x:
                    vec[kk] = x
                else:
                    vec.pop(kk, None)
            for j, v in rc.items():
                x = (combo.get(j, 0) - c * v) % p
                if x:
                    combo[j] = x
                else:
                    combo.pop(j, None)
        if not vec:
            return [combo.get(j, 0) for j in range(i + 1)]
        k = max(vec)
        inv = pow(vec[k], -1, p)
        rows[k] = ({kk: v * inv % p for kk, v in vec.items()},
                   {j: v * inv % p for j, v in combo.items()})
        cur = [(k2 + xk, m + xm, c) for k2, m, c in nf]
    raise UnluckySlice("minimal polynomial degree exceeds the limit")


def _check_zero_dimensional(ring: Ring, basis):
    pure = set()
    for f in basis:
        e = ring.unpack(f[0][1])
        nz = [i for i, x in enumerate(e) if x]
        if len(nz) == 1:
            pure.add(nz[0])
    if len(pure) != ring.n:
        raise UnluckySlice("slice is not zero-dimensional")


def _quotient_dimension(ring: Ring, basis) -> int:
    """Number of standard monomials (the basis must be zero-dimensional)."""
    leads = [ring.unpack(f[0][1]) for f in basis]
    count = 0
    stack = [tuple([0] * ring.n)]
    seen = {stack[0]}
    while stack:
        e = stack.pop()
        if any(all(a <= b for a, b in zip(l, e)) for l in leads):
            continue
        count += 1
        for i in range(ring.n):
            e2 = e[:i] + (e[i] + 1,) + e[i + 1:]
            if e2 not in seen:
                seen.add(e2)
                stack.append(e2)
    return count


class SliceEliminator:
    """Eliminant in (t, target) of a duplicated system, slice by slice.

    ``dup`` is a :class:`~ddesolve.model.DuplicatedSystem`; its per-copy
    polynomials are first turned into a local basis at each slice and then
    renamed copy by copy, which keeps the S-pairs inside a copy out of the
    main computation.
    """

    def __init__(self, dup, target: str = "z0", budget: Budget | None = None):
        self.dup = dup
        self.target = target
        self.budget = budget
        ns = dup.ns
        extra = [v for v in ns.vars.names
                 if not (v.startswith("x") or v.startswith("z") or v in ("u", "t"))]
        if extra:
            raise StructureError(f"free parameters {extra} are not supported by slicing")
        self.local_vars = VarTable([v for v in ns.vars.names if v != "t"])
        self.slice_vars = VarTable([v for v in dup.vars.names if v != "t"])
        self.ring = Ring(self.slice_vars, DEGREVLEX)
        self.nx = len([v for v in ns.vars.names if v.startswith("x")])
        self.stats = SliceStats()
        self.replay = True
        self.max_misses = 6
        self._steps = None

    def _remaining(self):
        if self.budget is None:
            return None
        return self.budget.child()

    def slice_minpoly(self, theta: int, p: int):
        """Minimal polynomial of the target at t = theta, modulo p."""
        t0 = time.monotonic()
        budget = self._remaining()
        local = [f.subs({"t": theta}, self.local_vars) for f in self.dup.base_polys]
        lgb = buchberger(IdealPresentation(tuple(local), DEGREVLEX, self.local_vars), budget, p=p)
        if lgb.is_unit():
            raise UnluckySlice("local system is inconsistent")
        V = self.slice_vars
        gens, groups = [], []
        for j in range(len(self.dup.copies)):
            bind = {"u": MultiPoly.var(V, f"u{j + 1}")}
            for i in range(self.nx):
                bind[f"x{i + 1}"] = MultiPoly.var(V, f"x{j * self.nx + i + 1}")
            for f in lgb.polys:
                gens.append(self.ring.from_poly(f.subs(bind, V), p))
                groups.append(j)
        rab = self.dup.rabinowitsch.subs({"t": theta}, V)
        gens.append(self.ring.from_poly(rab, p))
        groups.append(None)
        basis = None
        if self.replay and self._steps is not None:
            try:
                basis = groebner_internal(self.ring, gens, p, budget, Trace(), groups=groups, replay=self._steps)
                self.stats.replayed += 1
            except ReplayMismatch:
                log.debug("replay failed at theta=%d, recomputing", theta)
        if basis is None:
            trace = Trace()
            basis = groebner_internal(self.ring, gens, p, budget, trace, groups=groups)
            self.stats.pairs += trace.pairs
            if self._steps is None:
                self._steps = trace.steps
        if len(basis) == 1 and self.ring.degree(basis[0][0][1]) == 0:
            raise UnluckySlice("slice ideal is the unit ideal")
        _check_zero_dimensional(self.ring, basis)
        mp = minimal_polynomial(self.ring, basis, self.target, p)
        self.stats.slices += 1
        self.stats.seconds += time.monotonic() - t0
        self.stats.dims.add(_quotient_dimension(self.ring, basis))
        return mp

    def eliminant_mod(self, p: int, thetas=None, check_points: int = 2):
        """Eliminant modulo p as a dict {(deg_t, deg_z): residue}.

        Normalised so that the coefficient of the top power of the target
        is a monic polynomial in t.
        """
        thetas = iter(thetas) if thetas is not None else iter(range(2, p))
        xs, vals = [], []
        D = None
        misses = 0
        while True:
            if self.budget is not None and self.budget.expired():
                raise BudgetExhausted("time budget exhausted between slices", {"slices": self.stats.slices})
            theta = next(thetas)
            try:
                mp = self.slice_minpoly(theta, p)
            except UnluckySlice as exc:
                log.debug("theta=%d unlucky: %s", theta, exc)
                self.stats.unlucky += 1
                misses += 1
                if misses >= self.max_misses and not xs:
                    raise DegenerateSlices(f"{misses} consecutive degenerate slices: {exc}")
                continue
            misses = 0
            d = len(mp) - 1
            if D is None or d > D:
                if D is not None:
                    log.debug("degree jumped to %d at theta=%d, restarting", d, theta)
                D, xs, vals = d, [], []
            elif d < D:
                self.stats.unlucky += 1
                continue
            xs.append(theta % p)
            vals.append(mp)
            if len(xs) < 2 + check_points:
                continue
            out = self._reconstruct(xs, vals, D, p, check_points)
            if out is not None:
                return out

    @staticmethod
    def _reconstruct(xs, vals, D, p, check_points):
        use = len(xs) - check_points
        modulus = [1]
        for x in xs[:use]:
            modulus = upoly.mod_mul(modulus, [-x % p, 1], p)
        fracs = []
        for j in range(D):
            interp = upoly.mod_interpolate(xs[:use], [v[j] for v in vals[:use]], p)
            r = upoly.mod_rational_reconstruct_mq(interp, modulus, p)
            if r is None:
                return None
            num, den, slack = r
            if slack < 1:
                return None
            for x, v in zip(xs[use:], vals[use:]):
                dv = upoly.mod_eval(den, x, p)
                if not dv or upoly.mod_eval(num, x, p) * pow(dv, -1, p) % p != v[j]:
                    return None
            fracs.append((num, den))
        L = [1]
        for _, den in fracs:
            g = upoly.mod_gcd(L, den, p)
            L = upoly.mod_mul(L, upoly.mod_divmod(den, g, p)[0], p)
        out = {}
        for i, c in enumerate(L):
            if c:
                out[(i, D)] = c
        for j, (num, den) in enumerate(fracs):
            cof = upoly.mod_mul(num, upoly.mod_divmod(L, den, p)[0], p)
            for i, c in enumerate(cof):
                if c:
                    out[(i, j)] = c
        return out

    def eliminant(self, prime_source=None, min_primes: int = 1, max_primes: int = 64, verify=None):
        """Eliminant over Q as a primitive MultiPoly in (t, target).

        Primes are added until the rational reconstruction is unchanged by
        one more prime; ``verify`` (a callable on the candidate) may accept
        earlier.
        """
        prime_source = prime_source or primes()
        vars = VarTable(["t", self.target])
        modulus, residues = 1, None
        support = None
        last = None
        for count in range(1, max_primes + 1):
            p = next(prime_source)
            try:
                img = self.eliminant_mod(p)
            except ZeroDivisionError:
                continue
            self.stats.primes.append(p)
            shape = (max(j for _, j in img), max(i for i, j in img if j == max(j for _, j in img)))
            if support is None or shape > support:
                support, modulus, residues = shape, 1, {}
            elif shape < support:
                continue
            residues = {k: gmpy2.mpz(v) for k, v in _crt(residues, modulus, img, p).items()}
            modulus *= p
            cand = _rational_lift(residues, modulus, vars, self.target)
            if cand is None:
                continue
            if cand == last and count >= min_primes:
                return cand
            if verify is not None and count >= min_primes and verify(cand):
                return cand
            last = cand
        raise BudgetExhausted("prime budget exhausted", {"primes": max_primes})


def _crt(residues: dict, modulus: int, img: dict, p: int) -> dict:
    keys = set(residues) | set(img)
    inv = pow(modulus % p, -1, p) if modulus > 1 else 0
    out = {}
    for k in keys:
        a = int(residues.get(k, 0))
        b = img.get(k, 0)
        if modulus == 1:
            out[k] = b % p
        else:
            out[k] = a + modulus * ((b - a) * inv % p)
    return out


def _rational_lift(residues: dict, modulus: int, vars: VarTable, target: str):
    terms = {}
    for (i, j), a in residues.items():
        if not a:
            continue
        q = upoly.rational_reconstruct_int(int(a), modulus)
        if q is None:
            return None
        if q:
            e = [0, 0]
            e[vars.index("t")] = i
            e[vars.index(target)] = j
            terms[tuple(e)] = mpq(q)
    return MultiPoly(vars, terms).primitive()
