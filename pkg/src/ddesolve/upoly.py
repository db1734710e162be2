"""Dense univariate polynomials over QQ and over GF(p).

Polynomials are plain lists of coefficients, lowest degree first, with no
trailing zeros (the zero polynomial is ``[]``).  Functions with a ``p``
argument work modulo the prime ``p``; the others work over the rationals
with :class:`gmpy2.mpq` coefficients.
"""

from __future__ import annotations

import math

from gmpy2 import mpq

QQ = mpq


def trim(a):
    while a and not a[-1]:
        a.pop()
    return a


def deg(a) -> int:
    return len(a) - 1


def add(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return trim(out)


def sub(a, b):
    out = list(a) + [0] * max(0, len(b) - len(a))
    for i, c in enumerate(b):
        out[i] -= c
    return trim(out)


def scale(a, c):
    if not c:
        return []
    return [x * c for x in a]


def mul(a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return trim(out)


def deriv(a):
    return trim([a[i] * i for i in range(1, len(a))])


def evaluate(a, x):
    acc = 0
    for c in reversed(a):
        acc = acc * x + c
    return acc


def divmod_(a, b):
    """Quotient and remainder of ``a`` by nonzero ``b`` over QQ."""
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    r = [QQ(c) for c in a]
    db = len(b) - 1
    inv = 1 / QQ(b[-1])
    q = [QQ(0)] * max(0, len(r) - db)
    for i in range(len(r) - 1, db - 1, -1):
        c = r[i]
        if not c:
            continue
        c = c * inv
        q[i - db] = c
        for j in range(db + 1):
            r[i - db + j] -= c * b[j]
    return trim(q), trim(r[:db])


def monic(a):
    if not a:
        return []
    inv = 1 / QQ(a[-1])
    return [QQ(c) * inv for c in a]


def gcd(a, b):
    """Monic gcd over QQ."""
    a, b = trim(list(a)), trim(list(b))
    while b:
        a, b = b, divmod_(a, b)[1]
    return monic(a)


def shift(a, s):
    """Return ``a(x + s)``."""
    out = []
    for c in reversed(a):
        # out = out * (x + s) + c
        nxt = [0] * (len(out) + 1)
        for i, y in enumerate(out):
            nxt[i + 1] += y
            nxt[i] += y * s
        nxt[0] += c
        out = nxt
    return trim(out)


def interpolate(xs, ys):
    """Lagrange interpolation over QQ via Newton divided differences."""
    n = len(xs)
    coef = [QQ(y) for y in ys]
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    out = []
    for i in range(n - 1, -1, -1):
        out = add(mul(out, [-xs[i], 1]) if out else [], [coef[i]])
    return out


# -- GF(p) -----------------------------------------------------------------


def mod_trim(a, p):
    return trim([c % p for c in a])


def mod_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return mod_trim(out, p)


def mod_divmod(a, b, p):
    r = [c % p for c in a]
    db = len(b) - 1
    inv = pow(b[-1], -1, p)
    q = [0] * max(0, len(r) - db)
    for i in range(len(r) - 1, db - 1, -1):
        c = r[i]
        if not c:
            continue
        c = c * inv % p
        q[i - db] = c
        for j in range(db + 1):
            r[i - db + j] = (r[i - db + j] - c * b[j]) % p
    return trim(q), trim(r[:db])


def mod_monic(a, p):
    if not a:
        return []
    inv = pow(a[-1], -1, p)
    return [c * inv % p for c in a]


def mod_gcd(a, b, p):
    a, b = mod_trim(list(a), p), mod_trim(list(b), p)
    while b:
        a, b = b, mod_divmod(a, b, p)[1]
    return mod_monic(a, p)


def mod_interpolate(xs, ys, p):
    n = len(xs)
    coef = [y % p for y in ys]
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) * pow(xs[i] - xs[i - j], -1, p) % p
    out = []
    for i in range(n - 1, -1, -1):
        out = mod_mul(out, [-xs[i] % p, 1], p) or [0]
        out[0] = (out[0] + coef[i]) % p
        out = trim(out)
    return out


def mod_rational_reconstruct(a, modulus_poly, p, num_deg):
    """Find n/d with deg n <= num_deg and n = d*a mod ``modulus_poly``.

    Runs the extended Euclidean algorithm on (modulus_poly, a) and stops at
    the first remainder of degree <= num_deg.  Returns ``(n, d)`` with ``d``
    monic, or ``None`` when no denominator coprime to the modulus exists.
    """
    r0, r1 = mod_trim(list(modulus_poly), p), mod_trim(list(a), p)
    s0, s1 = [], [1]
    while r1 and len(r1) - 1 > num_deg:
        q, r = mod_divmod(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, mod_trim(_sub_lists(s0, mod_mul(q, s1, p)), p)
    if not s1:
        return None
    if mod_gcd(s1, modulus_poly, p) != [1]:
        return None
    inv = pow(s1[-1], -1, p)
    return [c * inv % p for c in r1], [c * inv % p for c in s1]


def _sub_lists(a, b):
    out = list(a) + [0] * max(0, len(b) - len(a))
    for i, c in enumerate(b):
        out[i] -= c
    return out


def rational_reconstruct_int(a: int, m: int):
    """Rational number n/d with |n|, d <= sqrt(m/2) congruent to ``a`` mod m."""
    bound = math.isqrt(m // 2)
    r0, r1 = m, a % m
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    if s1 < 0:
        r1, s1 = -r1, -s1
    return mpq(r1, s1)


def mod_rational_reconstruct_mq(a, modulus_poly, p):
    """Maximal-quotient rational reconstruction of ``a`` modulo ``modulus_poly``.

    Walks the whole Euclidean remainder sequence and keeps the pair n/d
    preceding the largest quotient, which is the likeliest true fraction.
    Returns ``(n, d, slack)`` with ``d`` monic, where ``slack`` is the
    degree of that quotient (large slack means more confidence).
    """
    r0, r1 = mod_trim(list(modulus_poly), p), mod_trim(list(a), p)
    if not r1:
        return [], [1], len(r0) - 1
    s0, s1 = [], [1]
    best = None
    while r1:
        q, r = mod_divmod(r0, r1, p)
        dq = len(q) - 1
        if best is None or dq > best[2]:
            best = (r1, s1, dq)
        r0, r1 = r1, r
        s0, s1 = s1, mod_trim(_sub_lists(s0, mod_mul(q, s1, p)), p)
    n, d, slack = best
    if mod_gcd(d, modulus_poly, p) != [1]:
        return None
    inv = pow(d[-1], -1, p)
    return [c * inv % p for c in n], [c * inv % p for c in d], slack


def mod_eval(a, x, p):
    acc = 0
    for c in reversed(a):
        acc = (acc * x + c) % p
    return acc
