"""DDE systems, their numerator polynomials, duplication and deformation.

Input language (one equation per line, ``#`` starts a comment)::

    catalytic u at 1
    order 1                      # optional, defaults to the highest D used
    F1 = 1 + t*u*F1^2 + t*u*D[F1]

``D[Fj]`` is the discrete derivative of F_j at the catalytic point, ``Dk[Fj]``
its k-th iterate, and ``Fj(a)`` (only at the catalytic point a) abbreviates
``Fj - (u - a)*D[Fj]``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from math import factorial

from gmpy2 import mpq

from . import expr
from .expr import ParseError
from .poly import MultiPoly, VarTable, determinant, to_rational


# -- systems --------------------------------------------------------------------


@dataclass(frozen=True)
class DdeSystem:
    """``F_i = f_i(u) + t*Q_i(Delta^0..k F_1, ..., t, u)`` for i = 1..n.

    ``Q[i]`` lives in ``qvars`` whose y-variables are ``y{(i-1)(k+1)+j+1}``
    for Delta^j F_i.  ``shift`` records the catalytic point before
    :func:`shift_catalytic_point` moved it to 0.
    """

    n: int
    k: int
    a: mpq
    f: tuple
    Q: tuple
    qvars: VarTable
    source: str = ""
    shift: mpq | None = None
    params: tuple = ()

    def yname(self, i: int, j: int) -> str:
        """Name of the variable standing for Delta^j F_{i+1}."""
        return f"y{i * (self.k + 1) + j + 1}"

    @property
    def delta(self) -> int:
        """Maximum of deg f_i and the total degrees of the Q_i."""
        return max([p.degree() for p in self.f] + [q.degree() for q in self.Q] + [0])


def make_qvars(n: int, k: int, extra=()) -> VarTable:
    ys = [f"y{i * (k + 1) + j + 1}" for i in range(n) for j in range(k + 1)]
    return VarTable(ys + ["t", "u"] + list(extra))


_HEADER = re.compile(r"^\s*catalytic\s+u\s+at\s+(\S+)\s*$")
_ORDER = re.compile(r"^\s*order\s+(\d+)\s*$")
_EQN = re.compile(r"^\s*F(\d+)\s*=(.*)$")
_DNAME = re.compile(r"^D(\d*)$")
_FNAME = re.compile(r"^F(\d+)$")


def _parse_rational(text: str, line: int, col: int) -> mpq:
    try:
        tree = expr.parse(text, line)
        val = expr._constant(tree)
    except ParseError:
        val = None
    if val is None:
        raise ParseError(f"expected a rational number, found {text!r}", line, col)
    return mpq(val)


def parse_dde(text: str) -> DdeSystem:
    """Parse and validate a DDE system written in the input language."""
    a = None
    declared_k = None
    eqns = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _HEADER.match(line)
        if m:
            if a is not None:
                raise ParseError("catalytic point declared twice", lineno, 1)
            a = _parse_rational(m.group(1), lineno, m.start(1) + 1)
            continue
        m = _ORDER.match(line)
        if m:
            declared_k = int(m.group(1))
            if declared_k < 1:
                raise ParseError("order must be at least 1", lineno, m.start(1) + 1)
            continue
        m = _EQN.match(line)
        if not m:
            raise ParseError("expected 'catalytic u at <a>', 'order <k>' or 'Fi = <expr>'", lineno, 1)
        i = int(m.group(1))
        if i in eqns:
            raise ParseError(f"F{i} defined twice", lineno, 1)
        rhs_col = m.start(2)
        try:
            tree = expr.parse(" " * rhs_col + m.group(2), lineno)
        except ParseError as err:
            raise ParseError(err.message, lineno, err.col) from None
        eqns[i] = (tree, lineno)
    if not eqns:
        raise ParseError("no equations found", 1, 1)
    if a is None:
        a = mpq(0)
    n = max(eqns)
    missing = [i for i in range(1, n + 1) if i not in eqns]
    if missing:
        raise ParseError(f"missing equation for F{missing[0]}", 1, 1)

    # first pass: discover the Delta order actually used
    used_k = 0
    for tree, lineno in eqns.values():
        used_k = max(used_k, _max_delta(tree, n, a, lineno))
    k = declared_k if declared_k is not None else max(used_k, 1)
    if used_k > k:
        # locate the offending term for the diagnostic
        for tree, lineno in eqns.values():
            col = _find_delta_over(tree, k)
            if col:
                raise ParseError(f"discrete derivative of order > {k}", lineno, col)
    qvars = make_qvars(n, k)
    one = MultiPoly.const(qvars, 1)

    def leaf_for(lineno):
        def leaf(node):
            kind = node[0]
            if kind == "sym":
                name = node[1]
                if name in ("t", "u"):
                    return MultiPoly.var(qvars, name)
                fm = _FNAME.match(name)
                if fm:
                    j = int(fm.group(1))
                    _check_index(j, n, lineno, node[2])
                    return MultiPoly.var(qvars, f"y{(j - 1) * (k + 1) + 1}")
                raise ParseError(f"unknown symbol {name!r}", lineno, node[2])
            if kind == "app":
                dm = _DNAME.match(node[1])
                fm = _FNAME.match(node[2])
                if not dm or not fm:
                    raise ParseError(f"expected D<k>[F<j>], found {node[1]}[{node[2]}]", lineno, node[3])
                order = int(dm.group(1) or 1)
                j = int(fm.group(1))
                _check_index(j, n, lineno, node[3])
                if order < 1 or order > k:
                    raise ParseError(f"discrete derivative of order {order} outside 1..{k}", lineno, node[3])
                return MultiPoly.var(qvars, f"y{(j - 1) * (k + 1) + order + 1}")
            if kind == "call":
                fm = _FNAME.match(node[1])
                if not fm:
                    raise ParseError(f"unknown function {node[1]!r}", lineno, node[3])
                j = int(fm.group(1))
                _check_index(j, n, lineno, node[3])
                val = expr._constant(node[2])
                if val is None or mpq(val) != a:
                    raise ParseError(f"F{j}(...) is only supported at the catalytic point {a}", lineno, node[3])
                y0 = MultiPoly.var(qvars, f"y{(j - 1) * (k + 1) + 1}")
                y1 = MultiPoly.var(qvars, f"y{(j - 1) * (k + 1) + 2}")
                return y0 - (MultiPoly.var(qvars, "u") - a) * y1
            raise ParseError("unexpected expression", lineno, 1)

        return leaf

    f_list, q_list = [], []
    it = qvars.index("t")
    for i in range(1, n + 1):
        tree, lineno = eqns[i]
        leaf = leaf_for(lineno)
        rhs = expr.evaluate(tree, leaf, one, lineno)
        f_terms, q_terms = {}, {}
        for e, c in rhs.terms.items():
            if e[it] == 0:
                if any(x for v, x in zip(qvars.names, e) if v != "u"):
                    col = _first_bad_summand(tree, leaf, one, it, lineno)
                    raise ParseError("term without a factor t involves an unknown series", lineno, col)
                f_terms[e] = c
            else:
                e2 = list(e)
                e2[it] -= 1
                q_terms[tuple(e2)] = c
        f_list.append(MultiPoly(qvars, f_terms))
        q_list.append(MultiPoly(qvars, q_terms))
    return DdeSystem(n, k, mpq(a), tuple(f_list), tuple(q_list), qvars, text)


def _check_index(j, n, lineno, col):
    if j < 1 or j > n:
        raise ParseError(f"F{j} is not one of F1..F{n}", lineno, col)


def _max_delta(node, n, a, lineno) -> int:
    kind = node[0]
    if kind == "app":
        m = _DNAME.match(node[1])
        return int(m.group(1) or 1) if m else 0
    if kind == "call":
        return 1
    if kind in ("add", "sub", "mul", "div"):
        return max(_max_delta(node[1], n, a, lineno), _max_delta(node[2], n, a, lineno))
    if kind in ("neg", "pow"):
        return _max_delta(node[1], n, a, lineno)
    return 0


def _find_delta_over(node, k):
    kind = node[0]
    if kind == "app":
        m = _DNAME.match(node[1])
        if m and int(m.group(1) or 1) > k:
            return node[3]
        return None
    if kind in ("add", "sub", "mul", "div"):
        return _find_delta_over(node[1], k) or _find_delta_over(node[2], k)
    if kind in ("neg", "pow"):
        return _find_delta_over(node[1], k)
    return None


def _summands(node, sign=1):
    if node[0] == "add":
        yield from _summands(node[1], sign)
        yield from _summands(node[2], sign)
    elif node[0] == "sub":
        yield from _summands(node[1], sign)
        yield from _summands(node[2], -sign)
    else:
        yield node


def _first_col(node):
    kind = node[0]
    if kind in ("sym",):
        return node[2]
    if kind in ("app", "call"):
        return node[3]
    if kind == "num":
        return None
    for child in node[1:]:
        if isinstance(child, tuple):
            c = _first_col(child)
            if c:
                return c
    return None


def _first_bad_summand(tree, leaf, one, it, lineno):
    for s in _summands(tree):
        val = expr.evaluate(s, leaf, one, lineno)
        for e in val.terms:
            if e[it] == 0 and any(x for v, x in zip(val.vars.names, e) if v != "u"):
                return _first_col(s) or 1
    return 1


def system_to_text(sys: DdeSystem) -> str:
    """Render a system back into the input language."""
    lines = [f"catalytic u at {_rat(sys.a)}", f"order {sys.k}"]
    rename = {}
    for i in range(sys.n):
        rename[sys.yname(i, 0)] = f"F{i + 1}"
        for j in range(1, sys.k + 1):
            rename[sys.yname(i, j)] = f"D{j}[F{i + 1}]" if j > 1 else f"D[F{i + 1}]"
    for i in range(sys.n):
        rhs = sys.f[i] + MultiPoly.var(sys.qvars, "t") * sys.Q[i]
        text = rhs.to_text()
        text = re.sub(r"\by(\d+)\b", lambda m: rename[m.group(0)], text)
        lines.append(f"F{i + 1} = {text}")
    return "\n".join(lines) + "\n"


def _rat(x) -> str:
    x = mpq(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def shift_catalytic_point(sys: DdeSystem) -> DdeSystem:
    """Equivalent system in which the catalytic point is 0 (u -> u + a)."""
    if sys.a == 0:
        return sys
    u = MultiPoly.var(sys.qvars, "u")
    bind = {"u": u + sys.a}
    f = tuple(p.subs(bind) for p in sys.f)
    Q = tuple(q.subs(bind) for q in sys.Q)
    prior = sys.a if sys.shift is None else sys.shift + sys.a
    return replace(sys, a=mpq(0), f=f, Q=Q, shift=prior)


def unshift_catalytic_point(sys: DdeSystem) -> DdeSystem:
    """Inverse of :func:`shift_catalytic_point`."""
    if not sys.shift:
        return sys
    u = MultiPoly.var(sys.qvars, "u")
    bind = {"u": u - sys.shift}
    return replace(sys, a=mpq(sys.shift), f=tuple(p.subs(bind) for p in sys.f),
                   Q=tuple(q.subs(bind) for q in sys.Q), shift=None)


# -- numerator systems ------------------------------------------------------------


def numerator_vars(n: int, k: int, extra=()) -> VarTable:
    xs = [f"x{i + 1}" for i in range(n)]
    zs = [f"z{j}" for j in range(n * k)]
    return VarTable(xs + ["u"] + zs + ["t"] + list(extra))


@dataclass(frozen=True)
class NumeratorSystem:
    sys: DdeSystem
    E: tuple
    m: tuple
    m_deformation: tuple
    vars: VarTable
    Y: dict
    Det: MultiPoly | None = None
    P: MultiPoly | None = None

    @property
    def n(self):
        return self.sys.n

    @property
    def k(self):
        return self.sys.k


def y_numerators(n: int, k: int, a, vars: VarTable) -> dict:
    """Numerators N_{i,j} with Y_{i,j} = N_{i,j} / (u - a)^j."""
    u = MultiPoly.var(vars, "u")
    s = u - a
    out = {}
    for i in range(n):
        x = MultiPoly.var(vars, f"x{i + 1}")
        acc = x
        out[(i, 0)] = x
        spow = MultiPoly.const(vars, 1)
        for j in range(1, k + 1):
            z = MultiPoly.var(vars, f"z{i * k + j - 1}")
            acc = acc - spow * z * mpq(1, factorial(j - 1))
            spow = spow * s
            out[(i, j)] = acc
    return out


def _weight(sys: DdeSystem, e) -> int:
    w = 0
    for i in range(sys.n):
        for j in range(1, sys.k + 1):
            w += j * e[sys.qvars.index(sys.yname(i, j))]
    return w


def clear_denominators(sys: DdeSystem, m_override=None) -> NumeratorSystem:
    """Numerators E_i = (u - a)^{m_i} (f_i - x_i + t*Q_i(Y)).

    m_i is the least exponent clearing the (u - a)-denominators of the Y
    substitution, read off from the Delta-weights of the monomials of Q_i.
    """
    n, k, a = sys.n, sys.k, sys.a
    extra = [v for v in sys.qvars.names if v not in ("t", "u") and not re.fullmatch(r"y\d+", v)]
    vars = numerator_vars(n, k, extra)
    N = y_numerators(n, k, a, vars)
    u = MultiPoly.var(vars, "u")
    t = MultiPoly.var(vars, "t")
    s = u - a
    spow = [MultiPoly.const(vars, 1)]
    m_min = []
    for q in sys.Q:
        m_min.append(max((_weight(sys, e) for e in q.terms), default=0))
    m_def = tuple(max(m, k) for m in m_min)
    m_use = tuple(m_override) if m_override is not None else tuple(m_min)
    E = []
    ymap = {sys.yname(i, j): (i, j) for i in range(n) for j in range(k + 1)}
    for idx in range(n):
        m = m_use[idx]
        while len(spow) <= m:
            spow.append(spow[-1] * s)
        q = sys.Q[idx]
        powers = {}

        def npow(key, d):
            if (key, d) not in powers:
                powers[(key, d)] = N[key] if d == 1 else npow(key, d - 1) * N[key]
            return powers[(key, d)]

        acc = MultiPoly.zero(vars)
        # group monomials by their y-part to reuse products
        groups = {}
        for e, c in q.terms.items():
            ypart = tuple((name, e[sys.qvars.index(name)]) for name in ymap if e[sys.qvars.index(name)])
            rest = {}
            for v, x in zip(sys.qvars.names, e):
                if x and v not in ymap:
                    rest[v] = x
            groups.setdefault(ypart, []).append((rest, c, _weight(sys, e)))
        for ypart, items in groups.items():
            prod = MultiPoly.const(vars, 1)
            for name, d in ypart:
                prod = prod * npow(ymap[name], d)
            coef = MultiPoly.zero(vars)
            for rest, c, w in items:
                if w > m:
                    raise ValueError("clearing exponent too small for this system")
                e2 = [0] * len(vars)
                for v, x in rest.items():
                    e2[vars.index(v)] = x
                coef = coef + MultiPoly(vars, {tuple(e2): c}) * spow[m - w]
            acc = acc + coef * prod
        f = sys.f[idx].to_vars(vars) if not sys.f[idx].is_zero() else MultiPoly.zero(vars)
        x = MultiPoly.var(vars, f"x{idx + 1}")
        E.append(spow[m] * (f - x) + t * acc)
    return NumeratorSystem(sys, tuple(E), tuple(m_min), m_def, vars, N)


def build_det_and_p(ns: NumeratorSystem) -> NumeratorSystem:
    """Jacobian determinant Det of (E_i) in x, and P with last column d/du."""
    xs = [f"x{i + 1}" for i in range(ns.n)]
    J = [[e.deriv(x) for x in xs] for e in ns.E]
    det = determinant(J)
    Jp = [row[:-1] + [e.deriv("u")] for row, e in zip(J, ns.E)]
    p = determinant(Jp)
    return replace(ns, Det=det, P=p)


def numerator_system(sys: DdeSystem) -> NumeratorSystem:
    return build_det_and_p(clear_denominators(sys))


# -- duplication ------------------------------------------------------------------------


@dataclass(frozen=True)
class DuplicatedSystem:
    ns: NumeratorSystem
    copies: tuple  # per copy: (E_1..E_n, Det, P)
    sat: MultiPoly
    sat_squarefree: MultiPoly
    rabinowitsch: MultiPoly
    vars: VarTable
    correspondence: dict
    base_polys: tuple = ()

    @property
    def equations(self) -> list:
        return [p for copy in self.copies for p in copy]

    @property
    def unknowns(self) -> list:
        return [v for v in self.vars.names if v not in ("t", "m")]

    def default_blocks(self):
        """{m} > {x-copies, u-copies} > {z1..} > {t, z0}."""
        xs = [v for v in self.vars.names if v.startswith("x")]
        us = [v for v in self.vars.names if re.fullmatch(r"u\d+", v)]
        zs = [v for v in self.vars.names if re.fullmatch(r"z\d+", v) and v != "z0"]
        return [["m"], xs + us, zs, ["t", "z0"]]


def duplicate(ns: NumeratorSystem, polys=None, rab_var: str = "m") -> DuplicatedSystem:
    """nk renamed copies of (E_1..E_n, Det, P) with the saturation polynomial.

    Copy j renames x_i to x_{(j-1)n+i} and u to u_j.  ``polys`` replaces the
    default (E..., Det, P) tuple, e.g. by (E, dE/dx1, dE/du) for the
    reduction strategy.
    """
    n, k, a = ns.n, ns.k, ns.sys.a
    base = tuple(polys) if polys is not None else tuple(ns.E) + (ns.Det, ns.P)
    nx = len([v for v in ns.vars.names if re.fullmatch(r"x\d+", v)])
    copies_n = n * k
    xs = [f"x{i + 1}" for i in range(nx * copies_n)]
    us = [f"u{j + 1}" for j in range(copies_n)]
    rest = [v for v in ns.vars.names if not re.fullmatch(r"x\d+", v) and v != "u"]
    vars = VarTable([rab_var] + xs + us + rest)
    copies = []
    corr = {}
    for j in range(copies_n):
        bind = {"u": MultiPoly.var(vars, us[j])}
        for i in range(nx):
            name = f"x{j * nx + i + 1}"
            bind[f"x{i + 1}"] = MultiPoly.var(vars, name)
            corr[name] = f"F{i + 1}(t,U{j + 1})"
        corr[us[j]] = f"U{j + 1}"
        copies.append(tuple(p.subs(bind, vars) for p in base))
    for i in range(n):
        for ell in range(k):
            corr[f"z{i * k + ell}"] = f"d^{ell}F{i + 1}/du^{ell}(t,{_rat(a)})"
    U = [MultiPoly.var(vars, v) for v in us]
    t = MultiPoly.var(vars, "t")
    sat = MultiPoly.const(vars, 1)
    for i in range(copies_n):
        for j in range(copies_n):
            if i != j:
                sat = sat * (U[i] - U[j])
    sqf = MultiPoly.const(vars, 1)
    for i in range(copies_n):
        for j in range(i + 1, copies_n):
            sqf = sqf * (U[i] - U[j])
    for i in range(copies_n):
        sat = sat * (U[i] - a)
        sqf = sqf * (U[i] - a)
    sat = sat * t
    sqf = sqf * t
    rab = MultiPoly.var(vars, rab_var) * sqf - 1
    return DuplicatedSystem(ns, tuple(copies), sat, sqf, rab, vars, corr, base)


# -- deformation --------------------------------------------------------------------------


@dataclass(frozen=True)
class DeformationParams:
    m: tuple
    M: int
    beta: int
    alpha: int
    gamma: tuple  # gamma[i][j] as MultiPoly in the deformed Q variables
    eps: str = "eps"

    def as_dict(self) -> dict:
        return {
            "m": list(self.m), "M": self.M, "beta": self.beta, "alpha": self.alpha,
            "gamma": [[g.to_text() for g in row] for row in self.gamma],
            "relation": "F_i(t^alpha, u) = G_i(t, u, 0)",
        }


def deformation_parameters(sys: DdeSystem, vars: VarTable | None = None) -> DeformationParams:
    n, k = sys.n, sys.k
    m = []
    for q in sys.Q:
        m.append(max(max((_weight(sys, e) for e in q.terms), default=0), k))
    M = sum(m)
    beta = (2 * M) // k
    alpha = 3 * n * n * k * (beta + 1) + 3 * n * M
    vars = vars or make_qvars(n, k, ["eps"])
    t = MultiPoly.var(vars, "t")
    gamma = tuple(
        tuple(MultiPoly.const(vars, (i + 1) ** k) if i == j else t ** beta for j in range(n))
        for i in range(n)
    )
    return DeformationParams(tuple(m), M, beta, alpha, gamma)


def build_deformed_system(sys: DdeSystem, eps: str = "eps"):
    """Deformed system G_i = f_i + t^alpha Q_i(..., t^alpha, u) + t eps^k sum_j gamma_ij D^k G_j."""
    if sys.a != 0:
        raise ValueError("deformation needs the catalytic point at 0; call shift_catalytic_point first")
    n, k = sys.n, sys.k
    vars = make_qvars(n, k, [eps])
    params = deformation_parameters(sys, vars)
    t = MultiPoly.var(vars, "t")
    e = MultiPoly.var(vars, eps)
    Q = []
    for i in range(n):
        q = sys.Q[i].to_vars(vars)
        q = q.subs({"t": t ** params.alpha}) * t ** (params.alpha - 1)
        extra = MultiPoly.zero(vars)
        for j in range(n):
            extra = extra + params.gamma[i][j] * MultiPoly.var(vars, sys.yname(j, k))
        Q.append(q + e ** k * extra)
    f = tuple(p.to_vars(vars) for p in sys.f)
    deformed = DdeSystem(n, k, mpq(0), f, tuple(Q), vars, sys.source, sys.shift, (eps,))
    return deformed, params


def truncate_t(p: MultiPoly, order: int, t: str = "t") -> MultiPoly:
    """Drop every term of t-degree >= ``order``."""
    i = p.vars.index(t)
    return MultiPoly(p.vars, {e: c for e, c in p.terms.items() if e[i] < order})


def deformed_det_identity(sys: DdeSystem):
    """Return (Det mod t^{n+1}, expected product mod t^{n+1}) for the deformed system."""
    base = shift_catalytic_point(sys)
    deformed, params = build_deformed_system(base)
    ns = clear_denominators(deformed, m_override=params.m)
    n, k = sys.n, sys.k
    xs = [f"x{i + 1}" for i in range(n)]
    # only entries mod t^{n+1} matter for the determinant mod t^{n+1}
    J = [[truncate_t(e.deriv(x), n + 1) for x in xs] for e in ns.E]
    det = truncate_t(determinant(J), n + 1)
    vars = ns.vars
    u = MultiPoly.var(vars, "u")
    t = MultiPoly.var(vars, "t")
    e = MultiPoly.var(vars, "eps")
    expected = u ** (params.M - n * k)
    for j in range(1, n + 1):
        expected = expected * (-(u ** k) + t * e ** k * j ** k)
    return det, truncate_t(expected, n + 1), params
