"""Double-double arithmetic on numpy arrays (and scalars).

A double-double value is a pair ``(hi, lo)`` of binary64 numbers with
``|lo| <= ulp(hi)/2``; the represented value is ``hi + lo`` and carries about
106 bits of significand.  Every routine is elementwise and branch-free so the
same code serves scalars and arrays.

The error-free transformations assume IEEE round-to-nearest with no fused
contraction, which numpy guarantees for its ufuncs.
"""
from __future__ import annotations

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1

_EXP_MIN = -745.2

LN2 = (0.6931471805599453, 2.3190468138462996e-17)
LOG_2PI_HALF = (0.9189385332046728, -3.878294158067242e-17)  # ln(2*pi)/2


def _f(x):
    return np.asarray(x, dtype=np.float64)


def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def from_float(x):
    x = _f(x)
    return x, np.zeros_like(x)


def to_float(a):
    return a[0] + a[1]


def neg(a):
    return -a[0], -a[1]


def add(a, b):
    s, e = two_sum(a[0], b[0])
    t, f = two_sum(a[1], b[1])
    e = e + t
    s, e = quick_two_sum(s, e)
    e = e + f
    return quick_two_sum(s, e)


def sub(a, b):
    return add(a, neg(b))


def add_float(a, b):
    s, e = two_sum(a[0], b)
    e = e + a[1]
    return quick_two_sum(s, e)


def mul(a, b):
    p, e = two_prod(a[0], b[0])
    e = e + (a[0] * b[1] + a[1] * b[0])
    return quick_two_sum(p, e)


def mul_float(a, b):
    p, e = two_prod(a[0], b)
    e = e + a[1] * b
    return quick_two_sum(p, e)


def div(a, b):
    q1 = a[0] / b[0]
    r = sub(a, mul_float(b, q1))
    q2 = r[0] / b[0]
    r = sub(r, mul_float(b, q2))
    q3 = r[0] / b[0]
    q = quick_two_sum(q1, q2)
    return add_float(q, q3)


def div_float(a, b):
    return div(a, from_float(b))


def ldexp(a, k):
    return np.ldexp(a[0], k), np.ldexp(a[1], k)


def exp(a):
    """exp of a double-double; returns exactly 0 below about -745."""
    hi = _f(a[0])
    low = hi < _EXP_MIN
    if np.any(low):
        a = (np.where(low, 0.0, hi), np.where(low, 0.0, a[1]))
        hi = _f(a[0])
    k = np.rint(hi / LN2[0])
    kk = np.clip(k, -1100, 1100)
    r = sub(a, mul_float(LN2, kk))
    # scale the reduced argument down by 2**-4, sum Taylor, square back up
    r = ldexp(r, -4)
    term = r
    s = add_float(r, 1.0)
    for i in range(2, 20):
        term = div_float(mul(term, r), float(i))
        s = add(s, term)
    for _ in range(4):
        s = mul(s, s)
    kk = kk.astype(np.int64) if isinstance(kk, np.ndarray) else int(kk)
    # split the power of two so neither ldexp leaves the normal range early
    k1 = np.asarray(kk) // 2
    k2 = np.asarray(kk) - k1
    s = ldexp(ldexp(s, k1), k2)
    if np.any(low):
        s = (np.where(low, 0.0, s[0]), np.where(low, 0.0, s[1]))
    return s


def log(a):
    """Natural log of a positive double-double (one Newton step on exp)."""
    # take out the binary exponent so exp(-y) stays clear of subnormals
    _, k = np.frexp(_f(a[0]))
    m = ldexp(a, -k)
    y = from_float(np.log(_f(m[0])))
    e = exp(neg(y))
    corr = add_float(mul(m, e), -1.0)
    return add(add(y, corr), mul_float(LN2, k.astype(np.float64)))
