"""Buchberger's algorithm over QQ or GF(p) with packed monomials.

Monomials are packed into one integer with 16 bits per variable: the low 15
bits hold the exponent and the top bit is a guard used for branch-free
divisibility and lcm tests.  Every monomial order used here is a linear
functional on exponent vectors, so each monomial also carries an integer key
that adds under multiplication and compares like the order.

Internal polynomials are lists of ``(key, mono, coeff)`` triples sorted by
decreasing key and made monic.
"""

from __future__ import annotations

import heapq
import logging
import time
from dataclasses import dataclass, field

from gmpy2 import mpq

from .poly import DEGREVLEX, MonomialOrder, MultiPoly, StructureError, VarTable

log = logging.getLogger(__name__)

W = 16
FIELD = (1 << W) - 1
EXP_LIMIT = 1 << (W - 1)


class BudgetExhausted(RuntimeError):
    """A Groebner computation exceeded its pair, size or time budget."""

    def __init__(self, reason: str, stats: dict | None = None):
        super().__init__(reason)
        self.reason = reason
        self.stats = stats or {}


@dataclass
class Budget:
    max_pairs: int | None = None
    max_basis: int | None = None
    seconds: float | None = None
    _deadline: float | None = field(default=None, repr=False)

    def start(self) -> "Budget":
        if self.seconds is not None and self._deadline is None:
            self._deadline = time.monotonic() + self.seconds
        return self

    def remaining(self) -> float | None:
        if self._deadline is None:
            return self.seconds
        return self._deadline - time.monotonic()

    def child(self, fraction: float = 1.0) -> "Budget":
        rem = self.remaining()
        return Budget(self.max_pairs, self.max_basis, None if rem is None else max(rem * fraction, 0.0)).start()

    def expired(self) -> bool:
        return self._deadline is not None and time.monotonic() > self._deadline


class Ring:
    """Packing and key layout for a variable table and monomial order."""

    def __init__(self, vars: VarTable, order: MonomialOrder = DEGREVLEX):
        self.vars = vars
        self.order = order
        n = len(vars)
        self.n = n
        self.guard = sum(1 << (W * i + W - 1) for i in range(n))
        self.low = sum(1 << (W * i) for i in range(n))
        self.full = (1 << (W * n)) - 1
        blocks = order.index_blocks(vars)
        # degrevlex inside a block: digit for the last variable is the most
        # significant after the degree
        weights = [0] * n
        base = 1 << W
        scale = 1
        for blk in reversed(blocks):
            r = len(blk)
            for pos, i in enumerate(blk):
                weights[i] = scale * ((base ** r) - base ** pos)
            scale *= base ** (r + 1)
        self.weights = weights
        self.blocks = blocks

    def pack(self, e) -> int:
        m = 0
        for i, x in enumerate(e):
            if x >= EXP_LIMIT:
                raise OverflowError("exponent too large for packed monomials")
            m |= x << (W * i)
        return m

    def unpack(self, m: int) -> tuple:
        return tuple((m >> (W * i)) & FIELD for i in range(self.n))

    def key(self, e) -> int:
        return sum(w * x for w, x in zip(self.weights, e))

    def divides(self, a: int, b: int) -> bool:
        g = self.guard
        return ((b | g) - a) & g == g

    def lcm(self, a: int, b: int) -> int:
        g = self.guard
        ge = ((a | g) - b) & g
        mask = (ge >> (W - 1)) * (EXP_LIMIT - 1)
        return (a & mask) | (b & ~mask & self.full)

    @staticmethod
    def degree(m: int) -> int:
        return m % FIELD

    # conversion ---------------------------------------------------------------

    def from_terms(self, terms, p: int | None):
        out = []
        for e, c in terms.items():
            if p is not None:
                if isinstance(c, int):
                    c %= p
                else:
                    c = to_mod(c, p)
                if not c:
                    continue
            elif not c:
                continue
            out.append((self.key(e), self.pack(e), c))
        out.sort(key=_first, reverse=True)
        return out

    def from_poly(self, f: MultiPoly, p: int | None):
        if f.vars != self.vars:
            f = f.to_vars(self.vars)
        return self.from_terms(f.terms, p)

    def to_poly(self, f, p: int | None) -> MultiPoly:
        terms = {}
        for _, m, c in f:
            terms[self.unpack(m)] = mpq(c) if p is None else mpq(_symmetric(c, p))
        return MultiPoly(self.vars, terms)


def _first(t):
    return t[0]


def _symmetric(c: int, p: int) -> int:
    return c - p if c > p // 2 else c


def to_mod(c, p: int) -> int:
    c = mpq(c)
    den = int(c.denominator) % p
    if not den:
        raise ZeroDivisionError("denominator vanishes modulo p")
    return int(c.numerator) * pow(den, -1, p) % p


def make_monic(f, p: int | None):
    c = f[0][2]
    if c == 1:
        return f
    if p is None:
        inv = 1 / mpq(c)
        return [(k, m, x * inv) for k, m, x in f]
    inv = pow(c, -1, p)
    return [(k, m, x * inv % p) for k, m, x in f]


class _Reducer:
    """Divides polynomials by the active elements of a growing basis.

    ``cache`` maps monomials seen during reduction to the index of their
    reducer (or None); it is kept consistent as elements come and go.
    """

    def __init__(self, ring: Ring, p: int | None):
        self.ring = ring
        self.p = p
        self.polys = []
        self.active = []
        self.cache = {}
        self.budget = None

    def set_active(self, active):
        self.active = active
        self.cache = {}

    def add(self, h_idx, removed):
        """Register a new active element and the indices it displaced."""
        g = self.ring.guard
        hm = self.polys[h_idx][0][1]
        removed = set(removed)
        cache = self.cache
        for m, idx in cache.items():
            if idx is None or idx in removed:
                if ((m | g) - hm) & g == g:
                    cache[m] = h_idx
                elif idx is not None:
                    cache[m] = self._search(m)

    def _search(self, m):
        g = self.ring.guard
        polys = self.polys
        for idx in self.active:
            if ((m | g) - polys[idx][0][1]) & g == g:
                return idx
        return None

    def reduce(self, f, monic: bool = True):
        """Fully reduced remainder of ``f`` (``[]`` when it reduces to 0)."""
        p = self.p
        polys = self.polys
        cache = self.cache
        search = self._search
        acc = {}
        monos = {}
        heap = []
        for k, m, c in f:
            acc[k] = c
            monos[k] = m
            heap.append(-k)
        heapq.heapify(heap)
        out = []
        pop, push = heapq.heappop, heapq.heappush
        budget = self.budget
        steps = 0
        while heap:
            steps += 1
            # long reductions over Q must still honour the deadline
            if budget is not None and not steps & 0xF and budget.expired():
                raise BudgetExhausted("time budget exhausted during a reduction")
            k = -pop(heap)
            c = acc.pop(k, None)
            if c is None:
                continue
            if p is not None:
                c %= p
            if not c:
                continue
            m = monos[k]
            try:
                idx = cache[m]
            except KeyError:
                idx = cache[m] = search(m)
            if idx is None:
                out.append((k, m, c))
                continue
            red = polys[idx]
            lk, lm, _ = red[0]
            dk = k - lk
            dm = m - lm
            for rk, rm, rc in red[1:]:
                nk = rk + dk
                old = acc.get(nk)
                if old is None:
                    acc[nk] = -c * rc
                    monos[nk] = rm + dm
                    push(heap, -nk)
                else:
                    acc[nk] = old - c * rc
        if not out:
            return []
        return make_monic(out, p) if monic else out


@dataclass
class Trace:
    pairs: int = 0
    zero_reductions: int = 0
    basis_sizes: list = field(default_factory=list)
    seconds: float = 0.0
    steps: list = field(default_factory=list)  # (i, j, lead) of useful pairs


def spoly(ring: Ring, f, g, l: int, p: int | None):
    lk = ring.key(ring.unpack(l))
    acc = {}
    monos = {}
    for poly, sign in ((f, 1), (g, -1)):
        hk, hm, _ = poly[0]
        dk, dm = lk - hk, l - hm
        for k, m, c in poly[1:]:
            nk = k + dk
            old = acc.get(nk)
            if old is None:
                acc[nk] = c if sign > 0 else -c
                monos[nk] = m + dm
            else:
                acc[nk] = old + c if sign > 0 else old - c
    out = []
    for k, c in acc.items():
        if p is not None:
            c %= p
        if c:
            out.append((k, monos[k], c))
    out.sort(key=_first, reverse=True)
    return out


class ReplayMismatch(ArithmeticError):
    """A replayed computation diverged from its recorded trace."""


def groebner_internal(ring: Ring, gens, p: int | None, budget: Budget | None = None, trace: Trace | None = None,
                      groups=None, replay=None):
    """Reduced Groebner basis of internal polynomials, sorted by leading key.

    ``groups`` optionally labels each generator; generators sharing a label
    must already form a Groebner basis of the ideal they generate.  They are
    installed unreduced and the S-pairs inside a group are skipped, since
    each of them has a standard representation over its own group.

    ``replay`` is the ``steps`` list of an earlier trace on a similar input
    (same shape, other coefficients).  Only the recorded pairs are reduced
    and their leading monomials must match, otherwise
    :class:`ReplayMismatch` is raised.  The result is only as trustworthy
    as the recorded run, so callers must verify it independently.
    """
    budget = (budget or Budget()).start()
    trace = trace if trace is not None else Trace()
    t0 = time.monotonic()
    red = _Reducer(ring, p)
    red.budget = budget
    degree = ring.degree
    guard = ring.guard
    lcm = ring.lcm
    pairs = []  # heap entries (sugar, lcm key, newer index, older index)
    pair_lcm = {}
    sugar = []
    label = []

    def divides(a, b):
        return ((b | guard) - a) & guard == guard

    def update(h_idx):
        # Gebauer-Moeller installation of the new element h
        nonlocal pairs
        hm = red.polys[h_idx][0][1]
        cand = []
        own = label[h_idx]
        for i in red.active:
            gm = red.polys[i][0][1]
            l = lcm(gm, hm)
            # a pair inside a known basis behaves like a coprime pair
            cand.append((i, l, l == gm + hm or (own is not None and label[i] == own)))
        keep = []
        for a, (i, l, coprime) in enumerate(cand):
            if not any(b != a and l2 != l and divides(l2, l) for b, (_, l2, _) in enumerate(cand)):
                keep.append((i, l, coprime))
        by_lcm = {}
        for i, l, coprime in keep:
            cur = by_lcm.get(l)
            if cur is None or (coprime and not cur[2]):
                by_lcm[l] = (i, l, coprime)
        new_pairs = [v for v in by_lcm.values() if not v[2]]
        kept_old = []
        for entry in pairs:
            _, _, j, i = entry
            l = pair_lcm.get((i, j))
            if l is None:
                continue
            if divides(hm, l) and lcm(red.polys[i][0][1], hm) != l and lcm(red.polys[j][0][1], hm) != l:
                del pair_lcm[(i, j)]
                continue
            kept_old.append(entry)
        pairs = kept_old
        for i, l, _ in new_pairs:
            gm = red.polys[i][0][1]
            s = max(sugar[i] + degree(l - gm), sugar[h_idx] + degree(l - hm))
            pairs.append((s, ring.key(ring.unpack(l)), h_idx, i))
            pair_lcm[(i, h_idx)] = l
        heapq.heapify(pairs)
        removed = [i for i in red.active if divides(hm, red.polys[i][0][1])]
        red.active = [i for i in red.active if i not in removed]
        red.active.append(h_idx)
        red.active.sort(key=lambda i: (len(red.polys[i]), i))
        red.add(h_idx, removed)

    def check(counter):
        if budget.max_pairs is not None and counter > budget.max_pairs:
            raise BudgetExhausted("pair budget exhausted", {"pairs": counter, "basis": len(red.active)})
        if budget.max_basis is not None and len(red.active) > budget.max_basis:
            raise BudgetExhausted("basis size budget exhausted", {"pairs": counter, "basis": len(red.active)})
        if budget.expired():
            raise BudgetExhausted("time budget exhausted", {"pairs": counter, "basis": len(red.active)})

    unit = [[(0, 0, 1)]]
    if groups is None:
        groups = [None] * len(gens)
    start = [(make_monic(f, p), g) for f, g in zip(gens, groups) if f]
    grouped = [item for item in start if item[1] is not None]
    loose = sorted((item for item in start if item[1] is None), key=lambda it: (it[0][0][0], len(it[0])))
    for f, g in grouped + loose:
        h = f if g is not None else red.reduce(f)
        if h:
            if degree(h[0][1]) == 0:
                return unit
            red.polys.append(h)
            sugar.append(max(degree(m) for _, m, _ in f))
            label.append(g)
            update(len(red.polys) - 1)

    if replay is not None:
        return _replay(ring, red, p, replay, trace, sugar, label, t0)
    counter = 0
    while pairs:
        s, _, j, i = heapq.heappop(pairs)
        l = pair_lcm.pop((i, j), None)
        if l is None:
            continue
        counter += 1
        trace.pairs += 1
        check(counter)
        h = red.reduce(spoly(ring, red.polys[i], red.polys[j], l, p))
        if not h:
            trace.zero_reductions += 1
            continue
        if degree(h[0][1]) == 0:
            trace.seconds += time.monotonic() - t0
            return unit
        red.polys.append(h)
        sugar.append(s)
        label.append(None)
        trace.steps.append((i, j, h[0][1]))
        update(len(red.polys) - 1)
        trace.basis_sizes.append(len(red.active))
        if counter % 200 == 0:
            log.debug("groebner: %d pairs, basis %d, queue %d", counter, len(red.active), len(pairs))
    result = interreduce(ring, [red.polys[i] for i in red.active], p)
    trace.seconds += time.monotonic() - t0
    log.debug("groebner done: %d pairs, %d zero, basis %d, %.2fs",
              trace.pairs, trace.zero_reductions, len(result), trace.seconds)
    return result


def _replay(ring: Ring, red: _Reducer, p, steps, trace: Trace, sugar, label, t0):
    guard = ring.guard
    for i, j, lead in steps:
        if max(i, j) >= len(red.polys):
            raise ReplayMismatch("trace refers to a missing element")
        l = ring.lcm(red.polys[i][0][1], red.polys[j][0][1])
        h = red.reduce(spoly(ring, red.polys[i], red.polys[j], l, p))
        trace.pairs += 1
        if not h or h[0][1] != lead:
            raise ReplayMismatch("leading monomial differs from the trace")
        red.polys.append(h)
        idx = len(red.polys) - 1
        removed = [a for a in red.active if ((red.polys[a][0][1] | guard) - lead) & guard == guard]
        red.active = [a for a in red.active if a not in removed]
        red.active.append(idx)
        red.active.sort(key=lambda a: (len(red.polys[a]), a))
        red.add(idx, removed)
    result = interreduce(ring, [red.polys[a] for a in red.active], p)
    trace.seconds += time.monotonic() - t0
    return result


def interreduce(ring: Ring, basis, p: int | None):
    """Minimal, fully tail-reduced, monic basis sorted by leading key."""
    basis = sorted(basis, key=lambda f: f[0][0])
    minimal = []
    for f in basis:
        if not any(ring.divides(g[0][1], f[0][1]) for g in minimal):
            minimal = [g for g in minimal if not ring.divides(f[0][1], g[0][1])]
            minimal.append(f)
    out = []
    for i, f in enumerate(minimal):
        red = _Reducer(ring, p)
        red.polys = [g for j, g in enumerate(minimal) if j != i]
        red.set_active(list(range(len(red.polys))))
        out.append([f[0]] + (red.reduce(f[1:], monic=False) if len(f) > 1 else []))
    out.sort(key=lambda f: f[0][0])
    return out


# -- public ideal operations -------------------------------------------------


@dataclass(frozen=True)
class IdealPresentation:
    generators: tuple
    order: MonomialOrder
    vars: VarTable

    @classmethod
    def of(cls, gens, order: MonomialOrder = DEGREVLEX, vars: VarTable | None = None) -> "IdealPresentation":
        gens = [g for g in gens if g]
        if vars is None:
            if not gens:
                raise StructureError("cannot infer variables of an empty ideal")
            vars = gens[0].vars
        return cls(tuple(g.to_vars(vars).canonical(order) for g in gens), order, vars)

    def is_zero(self) -> bool:
        return not self.generators

    def to_text(self) -> str:
        lines = [f"order: {self.order!r}", f"vars: {', '.join(self.vars.names)}"]
        lines += [g.to_text(self.order) for g in self.generators]
        return "\n".join(lines)


@dataclass(frozen=True)
class GroebnerBasis:
    polys: tuple
    order: MonomialOrder
    vars: VarTable
    reduced: bool = True
    trace: Trace | None = None

    def leading_monomials(self):
        return [f.lead(self.order)[0] for f in self.polys]

    def is_unit(self) -> bool:
        return len(self.polys) == 1 and self.polys[0].is_constant()

    def reduce(self, f: MultiPoly) -> MultiPoly:
        """Normal form of ``f`` against the basis."""
        ring = Ring(self.vars, self.order)
        red = _Reducer(ring, None)
        red.polys = [ring.from_poly(g, None) for g in self.polys]
        red.set_active(list(range(len(red.polys))))
        return ring.to_poly(red.reduce(ring.from_poly(f, None), monic=False), None)

    def contains(self, f: MultiPoly) -> bool:
        return not self.reduce(f)


def buchberger(pres: IdealPresentation, budget: Budget | None = None, p: int | None = None,
               groups=None) -> GroebnerBasis:
    """Reduced Groebner basis of the presentation under its order.

    With ``p`` the computation runs over GF(p) and coefficients are returned
    as symmetric residues.  ``groups`` is passed to the internal engine.
    """
    ring = Ring(pres.vars, pres.order)
    trace = Trace()
    internal = groebner_internal(ring, [ring.from_poly(g, p) for g in pres.generators], p, budget, trace,
                                 groups)
    polys = tuple(ring.to_poly(f, p) for f in internal)
    if p is None:
        polys = tuple(f.monic(pres.order) for f in polys)
    return GroebnerBasis(polys, pres.order, pres.vars, True, trace)


def fresh_name(vars: VarTable, stem: str) -> str:
    name, i = stem, 0
    while name in vars:
        i += 1
        name = f"{stem}{i}"
    return name


def saturate(pres: IdealPresentation, g: MultiPoly, budget: Budget | None = None) -> IdealPresentation:
    """Generators of ``pres : g^oo`` by the Rabinowitsch trick."""
    if not g:
        raise ValueError("cannot saturate by zero")
    m = fresh_name(pres.vars, "m")
    vars = VarTable((m,) + pres.vars.names)
    rest = [list(b) for b in pres.order.blocks] or [list(pres.vars.names)]
    order = MonomialOrder.block([m], *rest)
    rab = MultiPoly.var(vars, m) * g.to_vars(vars) - 1
    gens = [f.to_vars(vars) for f in pres.generators] + [rab]
    gb = buchberger(IdealPresentation(tuple(gens), order, vars), budget)
    keep = [f.to_vars(pres.vars) for f in gb.polys if not f.involves(m)]
    return IdealPresentation.of(keep, pres.order, pres.vars) if keep else IdealPresentation((), pres.order, pres.vars)


def elimination_order(vars: VarTable, eliminate_vars, keep) -> MonomialOrder:
    elim = [v for v in vars.names if v in set(eliminate_vars)]
    kept = [v for v in vars.names if v in set(keep)]
    return MonomialOrder.block(elim, kept)


def eliminate(pres: IdealPresentation, keep, budget: Budget | None = None, blocks=None) -> IdealPresentation:
    """Generators of the ideal intersected with the polynomials in ``keep``.

    ``blocks`` optionally refines the eliminated variables into several
    blocks (highest first); otherwise they form one degrevlex block.
    """
    keep = [v for v in pres.vars.names if v in set(keep)]
    for v in keep:
        pres.vars.index(v)
    drop = [v for v in pres.vars.names if v not in keep]
    if not drop:
        gb = buchberger(pres, budget)
        return IdealPresentation(gb.polys, pres.order, pres.vars)
    if blocks is None:
        blocks = [drop]
    order = MonomialOrder.block(*blocks, keep)
    gb = buchberger(IdealPresentation(pres.generators, order, pres.vars), budget)
    kept_vars = VarTable(keep)
    out = [f.to_vars(kept_vars) for f in gb.polys if not any(f.involves(v) for v in drop)]
    korder = MonomialOrder.block(keep)
    return IdealPresentation(tuple(f.canonical(korder) for f in out), korder, kept_vars)


def is_zero_dimensional(gb: GroebnerBasis, over_params=()) -> bool:
    """Finiteness criterion: every non-parameter variable has a pure-power leader."""
    params = set(over_params)
    if gb.is_unit():
        return True
    idx = {gb.vars.index(p) for p in params if p in gb.vars}
    need = {i for i in range(len(gb.vars)) if i not in idx}
    found = set()
    for e in gb.leading_monomials():
        support = [i for i, x in enumerate(e) if x]
        main = [i for i in support if i not in idx]
        if len(main) == 1:
            found.add(main[0])
    return need <= found


# a single product above this many term pairs takes minutes in pure Python
RESULTANT_WORK_LIMIT = 5_000_000


class DegeneracyError(ArithmeticError):
    """Every resultant at some elimination stage vanished identically."""


def iterated_resultant_eliminate(gens, eliminate_order, keep=("t", "z0"), budget: Budget | None = None) -> MultiPoly:
    """Eliminate variables one at a time by pairwise resultants.

    At each stage the polynomial of lowest positive degree in the variable
    is paired with every other one involving it; nonzero resultants replace
    them.  The answer may be a proper multiple of the true elimination
    polynomial, so callers should verify it and extract a minimal factor.
    """
    from .poly import resultant

    budget = (budget or Budget()).start()

    def check(work=0):
        if budget.expired():
            raise BudgetExhausted("time budget exhausted during resultants")
        if work > RESULTANT_WORK_LIMIT:
            raise BudgetExhausted(f"resultant product of {work} term pairs exceeds the limit")

    current = [g for g in gens if g]
    for v in eliminate_order:
        with_v = [g for g in current if g.involves(v)]
        without = [g for g in current if not g.involves(v)]
        if not with_v:
            continue
        if len(with_v) == 1:
            # a lone polynomial in v only constrains v itself: drop it
            current = without
            continue
        with_v.sort(key=lambda g: (g.degree(v), len(g)))
        pivot = with_v[0]
        produced = []
        for g in with_v[1:]:
            check()
            r = resultant(pivot, g, v, check)
            if r:
                produced.append(r.primitive())
        if not produced:
            raise DegeneracyError(f"all resultants vanished while eliminating {v}")
        current = without + produced
    keep_set = set(keep)
    final = [g for g in current if g and set(g.used_vars()) <= keep_set and not g.is_constant()]
    if not final:
        raise DegeneracyError("no nonzero polynomial in the kept variables")
    final.sort(key=lambda g: (g.degree(), len(g)))
    return final[0].canonical()
