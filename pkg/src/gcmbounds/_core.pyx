# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same API and semantics as ``_core_py``.

Must be built without value-changing float optimizations (no -ffast-math):
the double-double routines rely on exact IEEE rounding.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, log, exp, sqrt, cos, sin, floor, ceil, lgamma, ldexp, M_PI

cnp.import_array()

BACKEND = "cython"

cdef double RESCALE = 1e250
cdef double RESCALE_LOG = log(1e250)
cdef double HANKEL_MIN_X = 30.0


# ---------------------------------------------------------------- double-double

cdef struct dd_t:
    double hi
    double lo

cdef inline dd_t dd_make(double hi, double lo) noexcept nogil:
    cdef dd_t r
    r.hi = hi
    r.lo = lo
    return r

cdef inline dd_t two_sum(double a, double b) noexcept nogil:
    cdef double s = a + b
    cdef double bb = s - a
    return dd_make(s, (a - (s - bb)) + (b - bb))

cdef inline dd_t quick_two_sum(double a, double b) noexcept nogil:
    cdef double s = a + b
    return dd_make(s, b - (s - a))

cdef inline dd_t split(double a) noexcept nogil:
    cdef double c = 134217729.0 * a
    cdef double hi = c - (c - a)
    return dd_make(hi, a - hi)

cdef inline dd_t two_prod(double a, double b) noexcept nogil:
    # Dekker's product; libm fma is emulated in software on some targets
    cdef double p = a * b
    cdef dd_t x = split(a)
    cdef dd_t y = split(b)
    return dd_make(p, ((x.hi * y.hi - p) + x.hi * y.lo + x.lo * y.hi) + x.lo * y.lo)

cdef inline dd_t dd_add(dd_t a, dd_t b) noexcept nogil:
    cdef dd_t s = two_sum(a.hi, b.hi)
    cdef dd_t t = two_sum(a.lo, b.lo)
    cdef double e = s.lo + t.hi
    s = quick_two_sum(s.hi, e)
    e = s.lo + t.lo
    return quick_two_sum(s.hi, e)

cdef inline dd_t dd_neg(dd_t a) noexcept nogil:
    return dd_make(-a.hi, -a.lo)

cdef inline dd_t dd_sub(dd_t a, dd_t b) noexcept nogil:
    return dd_add(a, dd_neg(b))

cdef inline dd_t dd_add_float(dd_t a, double b) noexcept nogil:
    cdef dd_t s = two_sum(a.hi, b)
    return quick_two_sum(s.hi, s.lo + a.lo)

cdef inline dd_t dd_mul(dd_t a, dd_t b) noexcept nogil:
    cdef dd_t p = two_prod(a.hi, b.hi)
    return quick_two_sum(p.hi, p.lo + (a.hi * b.lo + a.lo * b.hi))

cdef inline dd_t dd_mul_float(dd_t a, double b) noexcept nogil:
    cdef dd_t p = two_prod(a.hi, b)
    return quick_two_sum(p.hi, p.lo + a.lo * b)

cdef inline dd_t dd_div(dd_t a, dd_t b) noexcept nogil:
    cdef double q1 = a.hi / b.hi
    cdef dd_t r = dd_sub(a, dd_mul_float(b, q1))
    cdef double q2 = r.hi / b.hi
    r = dd_sub(r, dd_mul_float(b, q2))
    cdef double q3 = r.hi / b.hi
    return dd_add_float(quick_two_sum(q1, q2), q3)


# ---------------------------------------------------------------- Bessel J

cdef double series_j(double mu, double x) noexcept nogil:
    cdef double y = 0.25 * x * x
    cdef double term = 1.0, total = 1.0, comp = 0.0, t
    cdef int k
    for k in range(1, 400):
        term = term * (-y) / (k * (mu + k))
        t = total + term
        if fabs(total) >= fabs(term):
            comp += (total - t) + term
        else:
            comp += (term - t) + total
        total = t
        if fabs(term) <= 1e-17 * fabs(total):
            break
    return (total + comp) * exp(mu * log(0.5 * x) - lgamma(mu + 1.0))


cdef double hankel_j(double mu, double x) noexcept nogil:
    cdef double four_mu2 = 4.0 * mu * mu
    cdef double p = 1.0, q = 0.0, term = 1.0, chi
    cdef int k
    for k in range(1, 200):
        term = term * (four_mu2 - (2 * k - 1) * (2 * k - 1)) / (8.0 * k * x)
        if k % 2:
            if (k // 2) % 2 == 0:
                q += term
            else:
                q -= term
        else:
            if (k // 2) % 2:
                p -= term
            else:
                p += term
        if fabs(term) <= 1e-17:
            break
    chi = x - (0.5 * mu + 0.25) * M_PI
    return sqrt(2.0 / (M_PI * x)) * (p * cos(chi) - q * sin(chi))


cpdef long miller_start(double nu, double x):
    cdef double nu0 = nu - floor(nu)
    cdef long k = <long>floor(nu) + 1
    cdef long kx = <long>ceil(x) + 1
    cdef double p_prev = 0.0, p = 1.0, tmp
    if kx > k:
        k = kx
    while fabs(p) < 1e20:
        tmp = 2.0 * (nu0 + k) / x * p - p_prev
        p_prev = p
        p = tmp
        k += 1
    return k + 5


cdef inline double _finish(double cap, long cap_shift, double total, long shift, double log_norm) noexcept nogil:
    cdef double mag
    if cap == 0.0:
        return 0.0
    mag = log(fabs(cap)) - log(fabs(total)) + log_norm - (shift - cap_shift) * RESCALE_LOG
    if (cap > 0) == (total > 0):
        return exp(mag)
    return -exp(mag)


cdef void miller_pair(double nu, double x, double[::1] b, long big, double* out_nu, double* out_nm1) noexcept nogil:
    cdef long n_int = <long>floor(nu)
    cdef double nu0 = nu - n_int
    cdef double j_next = 0.0, j = 1.0, j_prev, v, t
    cdef double s = 0.0, c = 0.0
    cdef double cap_nu = 0.0, cap_nm1 = 0.0
    cdef long shift = 0, cap_nu_shift = 0, cap_nm1_shift = 0
    cdef long k, order

    if big % 2 == 0:
        s = j if big == 0 else (nu0 + big) * b[big // 2] * j
    if big == n_int:
        cap_nu = j
    k = big
    while k > 0:
        j_prev = 2.0 * (nu0 + k) / x * j - j_next
        j_next = j
        j = j_prev
        order = k - 1
        if order % 2 == 0:
            v = j if order == 0 else (nu0 + order) * b[order // 2] * j
            t = s + v
            if fabs(s) >= fabs(v):
                c += (s - t) + v
            else:
                c += (v - t) + s
            s = t
        if order == n_int:
            cap_nu = j
            cap_nu_shift = shift
        if order == n_int - 1:
            cap_nm1 = j
            cap_nm1_shift = shift
        if fabs(j) > RESCALE:
            j /= RESCALE
            j_next /= RESCALE
            s /= RESCALE
            c /= RESCALE
            shift += 1
        k -= 1
    if n_int == 0:
        cap_nm1 = 2.0 * nu0 / x * j - j_next
        cap_nm1_shift = shift
    t = s + c
    v = nu0 * log(0.5 * x) - lgamma(nu0 + 1.0)
    out_nu[0] = _finish(cap_nu, cap_nu_shift, t, shift, v)
    out_nm1[0] = _finish(cap_nm1, cap_nm1_shift, t, shift, v)


def bessel_pair(double nu, x):
    cdef const double[::1] xv = np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=np.float64)))
    cdef Py_ssize_t n = xv.shape[0], i
    out_a = np.empty(n)
    out_b = np.empty(n)
    cdef double[::1] a = out_a
    cdef double[::1] bb = out_b
    cdef double xi, xmax = 0.0, nu0 = nu - floor(nu), hankel_x
    cdef long big = 0, half, m
    cdef double[::1] w

    hankel_x = nu * nu
    if hankel_x < HANKEL_MIN_X:
        hankel_x = HANKEL_MIN_X
    for i in range(n):
        xi = xv[i]
        if not (0.25 * xi * xi <= nu + 1.0) and not (xi > hankel_x) and xi > xmax:
            xmax = xi
    if xmax > 0.0:
        big = miller_start(nu, xmax)
        half = big // 2 + 1
        w_arr = np.ones(half + 1)
        w = w_arr
        for m in range(2, half + 1):
            w[m] = w[m - 1] * (nu0 + m - 1) / m
    else:
        w = np.ones(1)

    with nogil:
        for i in range(n):
            xi = xv[i]
            if 0.25 * xi * xi <= nu + 1.0:
                a[i] = series_j(nu, xi)
                bb[i] = 2.0 * nu / xi * a[i] - series_j(nu + 1.0, xi)
            elif xi > hankel_x:
                a[i] = hankel_j(nu, xi)
                bb[i] = hankel_j(nu - 1.0, xi)
            else:
                miller_pair(nu, xi, w, big, &a[i], &bb[i])
    return out_a, out_b


# ---------------------------------------------------------------- Hermite interpolation

cdef dd_t dd_exp(dd_t a) noexcept nogil:
    cdef double ln2_hi = 0.6931471805599453, ln2_lo = 2.3190468138462996e-17
    cdef double k = floor(a.hi / ln2_hi + 0.5)
    cdef dd_t r, s, term
    cdef int i, k1, k2
    if a.hi < -745.2:
        return dd_make(0.0, 0.0)
    if k > 1100:
        k = 1100
    if k < -1100:
        k = -1100
    r = dd_sub(a, dd_mul_float(dd_make(ln2_hi, ln2_lo), k))
    r = dd_make(r.hi / 16.0, r.lo / 16.0)
    term = r
    s = dd_add_float(r, 1.0)
    for i in range(2, 20):
        term = dd_div(dd_mul(term, r), dd_make(<double>i, 0.0))
        s = dd_add(s, term)
    for i in range(4):
        s = dd_mul(s, s)
    k1 = <int>k // 2
    k2 = <int>k - k1
    return dd_make(ldexp(ldexp(s.hi, k1), k2), ldexp(ldexp(s.lo, k1), k2))


def hermite_coeffs(u, double alpha, bint extended=True):
    cdef const double[::1] t = np.ascontiguousarray(np.asarray(u, dtype=np.float64)[::-1])
    cdef Py_ssize_t m = t.shape[0], i, k
    hi_arr = np.empty(m)
    lo_arr = np.zeros(m)
    cdef double[::1] out_hi = hi_arr
    cdef double[::1] out_lo = lo_arr
    col_hi_arr = np.empty(m)
    col_lo_arr = np.zeros(m)
    cdef double[::1] ch = col_hi_arr
    cdef double[::1] cl = col_lo_arr
    cdef dd_t e, num, den, up, low

    with nogil:
        for i in range(m):
            if extended:
                e = dd_exp(two_prod(t[i], alpha))
                ch[i] = e.hi
                cl[i] = e.lo
            else:
                ch[i] = exp(alpha * t[i])
                cl[i] = 0.0
        out_hi[m - 1] = ch[0]
        out_lo[m - 1] = cl[0]
        for k in range(1, m):
            # in place: entry i of the new column only needs old entries i, i+1
            for i in range(m - k):
                low = dd_make(ch[i], cl[i])
                up = dd_make(ch[i + 1], cl[i + 1])
                if t[i + k] == t[i]:
                    if extended:
                        e = dd_mul_float(dd_mul_float(low, -t[i]), alpha)
                    else:
                        e = dd_make((-t[i]) * alpha * low.hi, 0.0)
                elif extended:
                    num = dd_sub(dd_mul_float(up, -t[i]), dd_mul_float(low, -t[i + k - 1]))
                    den = two_sum(t[i + k], -t[i])
                    e = dd_div(num, den)
                else:
                    e = dd_make(((-t[i]) * up.hi - (-t[i + k - 1]) * low.hi) / (t[i + k] - t[i]), 0.0)
                ch[i] = e.hi
                cl[i] = e.lo
            out_hi[m - 1 - k] = ch[0]
            out_lo[m - 1 - k] = cl[0]
    return hi_arr, lo_arr


def horner_eval(h_hi, h_lo, u, z):
    cdef const double[::1] hh = np.ascontiguousarray(h_hi, dtype=np.float64)
    cdef const double[::1] hl = np.ascontiguousarray(h_lo, dtype=np.float64)
    cdef const double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef const double[::1] zv = np.ascontiguousarray(np.atleast_1d(np.asarray(z, dtype=np.float64)))
    cdef Py_ssize_t n = zv.shape[0], m = uv.shape[0], i, k
    val_arr = np.empty(n)
    der_arr = np.empty(n)
    cdef double[::1] val = val_arr
    cdef double[::1] der = der_arr
    cdef dd_t acc, dacc, factor, one = dd_make(1.0, 0.0)
    cdef dd_t ukd
    with nogil:
        for i in range(n):
            acc = dd_make(hh[0], hl[0])
            dacc = dd_make(0.0, 0.0)
            for k in range(1, m):
                ukd = dd_make(uv[k], 0.0)
                factor = dd_sub(one, dd_div(dd_make(zv[i], 0.0), ukd))
                dacc = dd_sub(dd_mul(factor, dacc), dd_div(acc, ukd))
                acc = dd_add(dd_mul(factor, acc), dd_make(hh[k], hl[k]))
            val[i] = acc.hi + acc.lo
            der[i] = dacc.hi + dacc.lo
    return val_arr, der_arr
