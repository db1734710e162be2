"""Exact multivariate polynomials over QQ.

A :class:`MultiPoly` is an immutable mapping from exponent tuples to
nonzero rational coefficients, tied to a :class:`VarTable`.  Monomial orders
(:class:`MonomialOrder`) only matter for leading terms, division and
printing; arithmetic is order independent.
"""

from __future__ import annotations

from functools import reduce
from math import gcd as igcd
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

from . import expr
from . import upoly

Rational = mpq


class StructureError(ValueError):
    """Operands live in different variable tables, or a variable is unknown."""


def to_rational(c) -> mpq:
    if isinstance(c, type(mpq())):
        return c
    try:
        return mpq(c)
    except TypeError:
        return mpq(c.numerator, c.denominator)


# -- variables and orders ----------------------------------------------------


class VarTable:
    """Ordered, immutable list of variable names.

    The position of a name is its index in every exponent tuple and the
    global tie-break order between variables.
    """

    __slots__ = ("names", "_index", "_hash")

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise StructureError(f"duplicate variable names in {names}")
        self.names = names
        self._index = {n: i for i, n in enumerate(names)}
        self._hash = hash(names)

    def __len__(self):
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __contains__(self, name):
        return name in self._index

    def __eq__(self, other):
        return isinstance(other, VarTable) and self.names == other.names

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"VarTable({list(self.names)})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise StructureError(f"unknown variable {name!r}") from None

    def extend(self, names: Iterable[str]) -> "VarTable":
        extra = [n for n in names if n not in self._index]
        return VarTable(self.names + tuple(extra))


class MonomialOrder:
    """Degrevlex, or a block order with degrevlex inside each block.

    Blocks are given by variable names, highest block first.  Variables of
    the table that no block mentions form an implicit last block.  With no
    blocks the order is plain degrevlex over the table order (first variable
    largest).
    """

    __slots__ = ("blocks",)

    def __init__(self, blocks: Sequence[Sequence[str]] | None = None):
        self.blocks = tuple(tuple(b) for b in blocks) if blocks else ()

    @classmethod
    def degrevlex(cls) -> "MonomialOrder":
        return cls()

    @classmethod
    def block(cls, *blocks: Sequence[str]) -> "MonomialOrder":
        return cls([b for b in blocks if b])

    @property
    def kind(self) -> str:
        return "block" if self.blocks else "degrevlex"

    def __eq__(self, other):
        return isinstance(other, MonomialOrder) and self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def __repr__(self):
        if not self.blocks:
            return "degrevlex"
        return "block(" + ", ".join("{" + ",".join(b) + "}" for b in self.blocks) + ")"

    def index_blocks(self, table: VarTable) -> list[list[int]]:
        if not self.blocks:
            return [list(range(len(table)))]
        seen = set()
        out = []
        for b in self.blocks:
            idx = []
            for name in b:
                if name in table and name not in seen:
                    idx.append(table.index(name))
                    seen.add(name)
            if idx:
                out.append(sorted(idx))
        rest = [i for i, n in enumerate(table.names) if n not in seen]
        if rest:
            out.append(rest)
        return out

    def key_function(self, table: VarTable):
        """Return ``exps -> sortable key``; larger key means larger monomial."""
        blocks = self.index_blocks(table)
        if len(blocks) == 1:
            idx = blocks[0]
            rev = idx[::-1]

            def key(e):
                return (sum(e[i] for i in idx),) + tuple(-e[i] for i in rev)

            return key

        revs = [b[::-1] for b in blocks]

        def key(e):
            out = []
            for b, r in zip(blocks, revs):
                out.append(sum(e[i] for i in b))
                out.extend(-e[i] for i in r)
            return tuple(out)

        return key


DEGREVLEX = MonomialOrder()


# -- polynomials --------------------------------------------------------------


class MultiPoly:
    """Immutable multivariate polynomial with rational coefficients."""

    __slots__ = ("vars", "terms", "_hash")

    def __init__(self, vars: VarTable, terms: Mapping[tuple, mpq] | None = None, *, _trusted=False):
        self.vars = vars
        if terms is None:
            self.terms = {}
        elif _trusted:
            self.terms = terms
        else:
            n = len(vars)
            clean = {}
            for e, c in terms.items():
                if len(e) != n:
                    raise StructureError("exponent vector length does not match the variable table")
                c = to_rational(c)
                if c:
                    clean[tuple(e)] = c
            self.terms = clean
        self._hash = None

    # construction -----------------------------------------------------------

    @classmethod
    def const(cls, vars: VarTable, c) -> "MultiPoly":
        c = to_rational(c)
        return cls(vars, {(0,) * len(vars): c} if c else {}, _trusted=True)

    @classmethod
    def zero(cls, vars: VarTable) -> "MultiPoly":
        return cls(vars, {}, _trusted=True)

    @classmethod
    def var(cls, vars: VarTable, name: str) -> "MultiPoly":
        e = [0] * len(vars)
        e[vars.index(name)] = 1
        return cls(vars, {tuple(e): mpq(1)}, _trusted=True)

    @classmethod
    def parse(cls, text: str, vars: VarTable | Iterable[str] | None = None) -> "MultiPoly":
        """Parse the text format (``^`` or ``**`` powers, explicit ``*``)."""
        tree = expr.parse(text)
        if vars is None:
            vars = VarTable(expr.symbols(tree))
        elif not isinstance(vars, VarTable):
            vars = VarTable(vars)

        def leaf(node):
            if node[0] != "sym":
                raise expr.ParseError(f"unexpected {node[1]!r}", 1, node[-1])
            if node[1] not in vars:
                raise expr.ParseError(f"unknown variable {node[1]!r}", 1, node[2])
            return cls.var(vars, node[1])

        return expr.evaluate(tree, leaf, cls.const(vars, 1))

    @classmethod
    def from_univariate(cls, vars: VarTable, name: str, coeffs: Sequence) -> "MultiPoly":
        """Build ``sum coeffs[i] * name^i``; coefficients may be numbers or polys."""
        v = vars.index(name)
        out = {}
        for i, c in enumerate(coeffs):
            if isinstance(c, MultiPoly):
                c._check(vars)
                for e, cc in c.terms.items():
                    e2 = list(e)
                    e2[v] += i
                    e2 = tuple(e2)
                    s = out.get(e2, 0) + cc
                    if s:
                        out[e2] = s
                    else:
                        out.pop(e2, None)
            else:
                c = to_rational(c)
                if c:
                    e2 = [0] * len(vars)
                    e2[v] = i
                    e2 = tuple(e2)
                    s = out.get(e2, 0) + c
                    if s:
                        out[e2] = s
                    else:
                        out.pop(e2, None)
        return cls(vars, out, _trusted=True)

    # basic protocol -----------------------------------------------------------

    def _check(self, vars):
        if self.vars != vars:
            raise StructureError(f"variable tables differ: {self.vars.names} vs {vars.names}")

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            other._check(self.vars)
            return other
        return MultiPoly.const(self.vars, other)

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def constant_value(self) -> mpq:
        return self.terms.get((0,) * len(self.vars), mpq(0))

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self.vars == other.vars and self.terms == other.terms
        try:
            return self.is_constant() and self.constant_value() == to_rational(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vars, frozenset(self.terms.items())))
        return self._hash

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"MultiPoly({self})"

    def __str__(self):
        return self.to_text()

    # arithmetic ---------------------------------------------------------------

    def __neg__(self):
        return MultiPoly(self.vars, {e: -c for e, c in self.terms.items()}, _trusted=True)

    def __pos__(self):
        return self

    def __add__(self, other):
        other = self._coerce(other)
        if len(other.terms) > len(self.terms):
            big, small = other.terms, self.terms
        else:
            big, small = self.terms, other.terms
        out = dict(big)
        for e, c in small.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s = s + c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return MultiPoly(self.vars, out, _trusted=True)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            c = to_rational(other)
            if not c:
                return MultiPoly.zero(self.vars)
            return MultiPoly(self.vars, {e: v * c for e, v in self.terms.items()}, _trusted=True)
        other._check(self.vars)
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        out = {}
        get = out.get
        for eb, cb in b.items():
            for ea, ca in a.items():
                e = tuple([x + y for x, y in zip(ea, eb)])
                out[e] = get(e, 0) + ca * cb
        return MultiPoly(self.vars, {e: c for e, c in out.items() if c}, _trusted=True)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, MultiPoly):
            if other.is_constant() and other:
                return self * (1 / other.constant_value())
            return self.exact_div(other)
        return self * (1 / to_rational(other))

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = MultiPoly.const(self.vars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # structure ----------------------------------------------------------------

    def degree(self, name: str | None = None) -> int:
        """Degree in ``name`` (total degree when ``name`` is None); -1 for zero."""
        if not self.terms:
            return -1
        if name is None:
            return max(sum(e) for e in self.terms)
        i = self.vars.index(name)
        return max(e[i] for e in self.terms)

    total_degree = degree

    def degree_in(self, names: Iterable[str]) -> int:
        idx = [self.vars.index(n) for n in names]
        if not self.terms:
            return -1
        return max(sum(e[i] for i in idx) for e in self.terms)

    def used_vars(self) -> list[str]:
        used = [False] * len(self.vars)
        for e in self.terms:
            for i, x in enumerate(e):
                if x:
                    used[i] = True
        return [n for n, u in zip(self.vars.names, used) if u]

    def involves(self, name: str) -> bool:
        i = self.vars.index(name)
        return any(e[i] for e in self.terms)

    def coeffs_in(self, name: str) -> list["MultiPoly"]:
        """Coefficients of powers of ``name`` (free of ``name``), lowest first."""
        v = self.vars.index(name)
        buckets: dict[int, dict] = {}
        for e, c in self.terms.items():
            d = e[v]
            e2 = e[:v] + (0,) + e[v + 1:]
            buckets.setdefault(d, {})[e2] = c
        if not buckets:
            return []
        top = max(buckets)
        return [MultiPoly(self.vars, buckets.get(i, {}), _trusted=True) for i in range(top + 1)]

    def sorted_terms(self, order: MonomialOrder = DEGREVLEX):
        key = order.key_function(self.vars)
        return sorted(self.terms.items(), key=lambda ec: key(ec[0]), reverse=True)

    def lead(self, order: MonomialOrder = DEGREVLEX):
        """Leading ``(exponents, coefficient)`` under ``order``."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        key = order.key_function(self.vars)
        e = max(self.terms, key=key)
        return e, self.terms[e]

    def to_vars(self, table: VarTable) -> "MultiPoly":
        """Re-express in ``table``; every used variable must exist there."""
        if table == self.vars:
            return self
        pos = []
        for i, n in enumerate(self.vars.names):
            pos.append(table.index(n) if n in table else None)
        n = len(table)
        out = {}
        for e, c in self.terms.items():
            e2 = [0] * n
            for i, x in enumerate(e):
                if x:
                    j = pos[i]
                    if j is None:
                        raise StructureError(f"variable {self.vars.names[i]!r} missing from target table")
                    e2[j] = x
            out[tuple(e2)] = c
        return MultiPoly(table, out, _trusted=True)

    # calculus and substitution -------------------------------------------------

    def deriv(self, name: str) -> "MultiPoly":
        v = self.vars.index(name)
        out = {}
        for e, c in self.terms.items():
            d = e[v]
            if d:
                e2 = e[:v] + (d - 1,) + e[v + 1:]
                out[e2] = c * d
        return MultiPoly(self.vars, out, _trusted=True)

    def subs(self, bindings: Mapping[str, object], vars: VarTable | None = None) -> "MultiPoly":
        """Simultaneous substitution of variables by polynomials or numbers.

        The result lives in ``vars`` (default: the table of the first
        polynomial binding, else ``self.vars``).  Unbound variables of
        ``self`` must exist in the result table.
        """
        if vars is None:
            vars = next((b.vars for b in bindings.values() if isinstance(b, MultiPoly)), self.vars)
        idx = {}
        for name, val in bindings.items():
            i = self.vars.index(name)
            if isinstance(val, MultiPoly):
                val._check(vars)
            else:
                val = MultiPoly.const(vars, val)
            idx[i] = val
        keep = [i for i in range(len(self.vars)) if i not in idx]
        keep_pos = {}
        for i in keep:
            keep_pos[i] = vars.index(self.vars.names[i]) if any(e[i] for e in self.terms) else None
        powers: dict[tuple[int, int], MultiPoly] = {}

        def power(i, d):
            key = (i, d)
            p = powers.get(key)
            if p is None:
                p = idx[i] if d == 1 else power(i, d - 1) * idx[i]
                powers[key] = p
            return p

        acc: dict[tuple, mpq] = {}
        n = len(vars)
        for e, c in self.terms.items():
            base = [0] * n
            for i in keep:
                if e[i]:
                    base[keep_pos[i]] += e[i]
            term = MultiPoly(vars, {tuple(base): c}, _trusted=True)
            for i, val in idx.items():
                if e[i]:
                    term = term * power(i, e[i])
            for e2, c2 in term.terms.items():
                s = acc.get(e2, 0) + c2
                if s:
                    acc[e2] = s
                else:
                    acc.pop(e2, None)
        return MultiPoly(vars, acc, _trusted=True)

    def evaluate(self, values: Mapping[str, object]):
        """Evaluate at numbers for every variable; returns a rational."""
        vals = [to_rational(values[n]) if n in values else None for n in self.vars.names]
        total = mpq(0)
        for e, c in self.terms.items():
            term = c
            for i, x in enumerate(e):
                if x:
                    if vals[i] is None:
                        raise StructureError(f"no value for variable {self.vars.names[i]!r}")
                    term *= vals[i] ** x
            total += term
        return total

    # normalization ---------------------------------------------------------------

    def content(self) -> mpq:
        """Positive rational c such that self/c has coprime integer coefficients."""
        if not self.terms:
            return mpq(0)
        nums = [int(c.numerator) for c in self.terms.values()]
        dens = [int(c.denominator) for c in self.terms.values()]
        g = reduce(igcd, nums)
        l = reduce(lambda a, b: a * b // igcd(a, b), dens)
        return mpq(abs(g), l)

    def primitive(self) -> "MultiPoly":
        if not self.terms:
            return self
        return self * (1 / self.content())

    def canonical(self, order: MonomialOrder = DEGREVLEX) -> "MultiPoly":
        """Integer-content-free with positive leading coefficient under ``order``."""
        if not self.terms:
            return self
        p = self.primitive()
        if p.lead(order)[1] < 0:
            p = -p
        return p

    def monic(self, order: MonomialOrder = DEGREVLEX) -> "MultiPoly":
        return self * (1 / self.lead(order)[1])

    # printing -------------------------------------------------------------------

    def to_text(self, order: MonomialOrder = DEGREVLEX) -> str:
        if not self.terms:
            return "0"
        parts = []
        names = self.vars.names
        for k, (e, c) in enumerate(self.sorted_terms(order)):
            mono = "*".join(
                (names[i] if x == 1 else f"{names[i]}^{x}") for i, x in enumerate(e) if x
            )
            neg = c < 0
            a = -c if neg else c
            if mono:
                body = mono if a == 1 else f"{_fmt(a)}*{mono}"
            else:
                body = _fmt(a)
            if k == 0:
                parts.append(f"-{body}" if neg else body)
            else:
                parts.append(f"- {body}" if neg else f"+ {body}")
        return " ".join(parts)

    # division -------------------------------------------------------------------

    def divmod(self, divisors: Sequence["MultiPoly"], order: MonomialOrder = DEGREVLEX):
        """Multivariate division: returns ``(quotients, remainder)``."""
        return _divide(self, divisors, order)

    def exact_div(self, other: "MultiPoly") -> "MultiPoly":
        """Quotient of an exact division; raises ``ArithmeticError`` otherwise."""
        other = self._coerce(other)
        if not other:
            raise ZeroDivisionError("division by zero polynomial")
        if other.is_constant():
            return self * (1 / other.constant_value())
        (q,), r = _divide(self, [other], DEGREVLEX)
        if r:
            raise ArithmeticError("polynomial division is not exact")
        return q

    def divides(self, other: "MultiPoly") -> bool:
        try:
            other.exact_div(self)
        except ArithmeticError:
            return False
        return True


def _fmt(c: mpq) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _divide(p: MultiPoly, divisors: Sequence[MultiPoly], order: MonomialOrder):
    for d in divisors:
        p._check(d.vars)
        if not d:
            raise ZeroDivisionError("division by zero polynomial")
    key = order.key_function(p.vars)
    leads = []
    for d in divisors:
        e = max(d.terms, key=key)
        leads.append((e, d.terms[e]))
    rest = dict(p.terms)
    quot = [dict() for _ in divisors]
    rem = {}
    import heapq

    heap = [(_neg_key(key(e)), e) for e in rest]
    heapq.heapify(heap)
    while heap:
        _, e = heapq.heappop(heap)
        c = rest.pop(e, None)
        if c is None or not c:
            continue
        for j, (le, lc) in enumerate(leads):
            if all(a >= b for a, b in zip(e, le)):
                shift = tuple(a - b for a, b in zip(e, le))
                f = c / lc
                quot[j][shift] = quot[j].get(shift, 0) + f
                for de, dc in divisors[j].terms.items():
                    if de == le:
                        continue
                    ne = tuple(a + b for a, b in zip(de, shift))
                    old = rest.get(ne)
                    if old is None:
                        rest[ne] = -f * dc
                        heapq.heappush(heap, (_neg_key(key(ne)), ne))
                    else:
                        rest[ne] = old - f * dc
                break
        else:
            rem[e] = c
    vars = p.vars
    return (
        [MultiPoly(vars, {e: c for e, c in q.items() if c}, _trusted=True) for q in quot],
        MultiPoly(vars, rem, _trusted=True),
    )


def _neg_key(k):
    return tuple(-x for x in k)


def normal_form(p: MultiPoly, divisors: Sequence[MultiPoly], order: MonomialOrder = DEGREVLEX) -> MultiPoly:
    """Remainder of ``p`` under multivariate division by ``divisors``."""
    return _divide(p, divisors, order)[1]


def partial_derivative(p: MultiPoly, name: str) -> MultiPoly:
    return p.deriv(name)


def substitute(p: MultiPoly, bindings: Mapping[str, object], vars: VarTable | None = None) -> MultiPoly:
    return p.subs(bindings, vars)


# -- resultants -----------------------------------------------------------------


def _prem(a: list[MultiPoly], b: list[MultiPoly], check=None) -> list[MultiPoly]:
    """Pseudo-remainder of univariate coefficient lists (lowest first)."""
    da, db = len(a) - 1, len(b) - 1
    r = list(a)
    lb = b[-1]
    zero = MultiPoly.zero(lb.vars)
    e = da - db + 1
    while len(r) - 1 >= db and r:
        dr = len(r) - 1
        lr = r[-1]
        out = []
        for c in r:
            if check is not None:
                check(len(c) * len(lb))
            out.append(c * lb)
        r = out
        for j in range(db + 1):
            if check is not None:
                check(len(lr) * len(b[j]))
            r[dr - db + j] = r[dr - db + j] - lr * b[j]
        r.pop()
        e -= 1
        while r and not r[-1]:
            r.pop()
    if e > 0:
        f = lb ** e
        r = [c * f for c in r]
    return r if r else [zero][:0]


def resultant(p: MultiPoly, q: MultiPoly, name: str, check=None) -> MultiPoly:
    """Resultant with respect to ``name`` by the subresultant PRS.

    ``check(work)`` is called between steps, with the term-count product of
    the next multiplication where known, and may raise to abandon the
    computation (used for budgets).
    """
    p._check(q.vars)
    A, B = p.coeffs_in(name), q.coeffs_in(name)
    if not A or not B:
        return MultiPoly.zero(p.vars)
    da, db = len(A) - 1, len(B) - 1
    if da == 0 and db == 0:
        raise ValueError(f"neither polynomial involves {name!r}")
    if db == 0:
        return B[0] ** da
    if da == 0:
        return A[0] ** db
    s = 1
    if da < db:
        A, B = B, A
        da, db = db, da
        if da % 2 and db % 2:
            s = -1
    g = MultiPoly.const(p.vars, 1)
    h = MultiPoly.const(p.vars, 1)
    while True:
        da, db = len(A) - 1, len(B) - 1
        d = da - db
        if da % 2 and db % 2:
            s = -s
        if check is not None:
            check()
        R = _prem(A, B, check)
        if not R:
            return MultiPoly.zero(p.vars)
        A = B
        div = g * h ** d
        B = []
        for c in R:
            if check is not None:
                check()
            B.append(c.exact_div(div))
        g = A[-1]
        if d == 0:
            pass
        elif d == 1:
            h = g
        else:
            h = (g ** d).exact_div(h ** (d - 1))
        if len(B) - 1 == 0:
            break
    da = len(A) - 1
    lb = B[-1]
    if da == 1:
        h = lb
    else:
        h = (lb ** da).exact_div(h ** (da - 1))
    return h * s


# -- determinants ------------------------------------------------------------------


def determinant(matrix: Sequence[Sequence[MultiPoly]]) -> MultiPoly:
    """Determinant of a square polynomial matrix.

    Cofactor expansion up to 4x4, fraction-free Bareiss elimination above.
    """
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise StructureError("determinant of a non-square matrix")
    if n == 0:
        raise StructureError("empty matrix")
    if n <= 4:
        return _det_laplace([list(r) for r in matrix])
    return det_bareiss(matrix)


def _det_laplace(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = None
    for j in range(n):
        if not m[0][j]:
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _det_laplace(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total if total is not None else MultiPoly.zero(m[0][0].vars)


def det_bareiss(matrix: Sequence[Sequence[MultiPoly]]) -> MultiPoly:
    m = [list(r) for r in matrix]
    n = len(m)
    vars = m[0][0].vars
    sign = 1
    prev = MultiPoly.const(vars, 1)
    for k in range(n - 1):
        if not m[k][k]:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return MultiPoly.zero(vars)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[k][k] * m[i][j] - m[i][k] * m[k][j]).exact_div(prev)
        prev = m[k][k]
    return m[n - 1][n - 1] * sign


def jacobian_determinant(polys: Sequence[MultiPoly], names: Sequence[str]) -> MultiPoly:
    if len(polys) != len(names):
        raise StructureError("Jacobian needs as many polynomials as variables")
    return determinant([[p.deriv(v) for v in names] for p in polys])


# -- bivariate gcd and squarefree part ------------------------------------------------


def _as_bivariate(p: MultiPoly, x: str, z: str):
    """Coefficients of ``p`` in z as dense QQ[x] lists."""
    ix, iz = p.vars.index(x), p.vars.index(z)
    for e in p.terms:
        if any(v for i, v in enumerate(e) if i not in (ix, iz)):
            raise StructureError(f"polynomial involves variables other than {x}, {z}")
    dz = p.degree(z)
    out = [[] for _ in range(dz + 1)]
    for e, c in p.terms.items():
        row = out[e[iz]]
        d = e[ix]
        if len(row) <= d:
            row.extend([mpq(0)] * (d + 1 - len(row)))
        row[d] += c
    return [upoly.trim(r) for r in out]


def _from_bivariate(vars: VarTable, x: str, z: str, rows) -> MultiPoly:
    ix, iz = vars.index(x), vars.index(z)
    out = {}
    n = len(vars)
    for j, row in enumerate(rows):
        for i, c in enumerate(row):
            if c:
                e = [0] * n
                e[ix] += i
                e[iz] += j
                out[tuple(e)] = mpq(c)
    return MultiPoly(vars, out, _trusted=True)


def _content_x(rows):
    g = []
    for r in rows:
        if r:
            g = upoly.gcd(g, r) if g else upoly.monic(r)
    return g


def bivariate_gcd(p: MultiPoly, q: MultiPoly, x: str, z: str) -> MultiPoly:
    """Gcd in QQ[x, z] by evaluation at x = 0, 1, 2, ... and interpolation.

    Images are univariate gcds in z, scaled by the gcd of the leading
    coefficients; interpolation stops once the candidate divides both inputs.
    """
    p._check(q.vars)
    if not p:
        return q.canonical()
    if not q:
        return p.canonical()
    P, Q = _as_bivariate(p, x, z), _as_bivariate(q, x, z)
    cp, cq = _content_x(P), _content_x(Q)
    cont = upoly.gcd(cp, cq)
    P = [upoly.divmod_(r, cp)[0] for r in P]
    Q = [upoly.divmod_(r, cq)[0] for r in Q]
    lc_gcd = upoly.gcd(P[-1], Q[-1])
    bound = min(max(len(r) for r in P), max(len(r) for r in Q)) + len(lc_gcd)
    xs, images, best = [], [], None
    theta = 0
    while True:
        lv = upoly.evaluate(lc_gcd, theta)
        if upoly.evaluate(P[-1], theta) and upoly.evaluate(Q[-1], theta) and lv:
            a = upoly.trim([upoly.evaluate(r, theta) for r in P])
            b = upoly.trim([upoly.evaluate(r, theta) for r in Q])
            g = upoly.gcd(a, b)
            dg = len(g) - 1
            if best is None or dg < best:
                best, xs, images = dg, [], []
            if dg == best:
                xs.append(mpq(theta))
                images.append([c * lv for c in g])
                if len(xs) >= bound or len(xs) % 4 == 0:
                    rows = [upoly.interpolate(xs, [img[j] for img in images]) for j in range(best + 1)]
                    cand = _content_x(rows)
                    rows = [upoly.divmod_(r, cand)[0] for r in rows]
                    if _bi_divides(rows, P) and _bi_divides(rows, Q):
                        res = _from_bivariate(p.vars, x, z, [upoly.mul(r, cont) for r in rows])
                        return res.canonical()
                    if len(xs) > bound + 8:
                        raise ArithmeticError("bivariate gcd interpolation did not converge")
        theta += 1


def _bi_divides(d, p) -> bool:
    """Exact division test in QQ[x][z] for dense row lists."""
    r = [list(row) for row in p]
    dd = len(d) - 1
    lead = d[-1]
    while len(r) - 1 >= dd and r:
        top = r[-1]
        q, rem = upoly.divmod_(top, lead)
        if rem:
            return False
        shift = len(r) - 1 - dd
        for j in range(dd + 1):
            r[shift + j] = upoly.sub(r[shift + j], upoly.mul(q, d[j]))
        while r and not r[-1]:
            r.pop()
    return not r


def squarefree_part(p: MultiPoly, t: str | None = None, z: str | None = None) -> MultiPoly:
    """Product of the distinct irreducible factors of a polynomial in <= 2 variables."""
    if not p:
        raise ValueError("squarefree part of zero")
    used = p.used_vars()
    if len(used) > 2:
        raise StructureError(f"squarefree_part needs at most two variables, got {used}")
    if p.is_constant():
        return MultiPoly.const(p.vars, 1)
    if z is None or t is None:
        names = [n for n in p.vars.names if n in used]
        if len(names) == 1:
            names = names + [n for n in p.vars.names if n not in names][:1]
        t, z = (t or names[0]), (z or names[1] if len(names) > 1 else names[0])
    if not p.involves(z):
        t, z = z, t
    rows = _as_bivariate(p, t, z)
    cont = _content_x(rows)
    lc = upoly.divmod_(rows[-1], cont)[0] if cont else rows[-1]
    pp = _from_bivariate(p.vars, t, z, [upoly.divmod_(r, cont)[0] for r in rows])
    # squarefree part of the content in t alone
    cont_sf = upoly.divmod_(cont, upoly.gcd(cont, upoly.deriv(cont)))[0] if len(cont) > 1 else [mpq(1)]
    if pp.involves(z):
        g = bivariate_gcd(pp, pp.deriv(z), t, z)
        pp_sf = pp.exact_div(g)
    else:
        pp_sf = pp
    del lc
    return (pp_sf * _from_bivariate(p.vars, t, z, [cont_sf])).canonical()
