"""Pure-Python kernels, vectorized with numpy.

This is the fallback for the compiled ``_core`` extension and must expose the
same functions with the same semantics:

``bessel_pair(nu, x)``
    ``(J_nu(x), J_{nu-1}(x))`` for ``nu >= 0`` and an array of ``x > 0``.
``hermite_coeffs(u, alpha, extended)``
    product-basis coefficients of the Hermite interpolant of ``exp(alpha*z)``.
``horner_eval(H_hi, H_lo, u, z)``
    value and derivative of that interpolant at the points ``z``.

Bessel evaluation uses three regimes:

* ascending series while ``x**2/4 <= nu + 1`` (terms never grow);
* Hankel's asymptotic expansion when ``x > max(30, nu**2)``;
* otherwise Miller's backward recurrence from a start order found by a
  forward test, normalized with the Neumann sum
  ``(x/2)**m / Gamma(m+1) = sum_k c_k J_{m+2k}(x)`` at the fractional order ``m``.
"""
from __future__ import annotations

import math

import numpy as np

from . import dd

BACKEND = "python"

_RESCALE = 1e250
_RESCALE_LOG = math.log(_RESCALE)
_HANKEL_MIN_X = 30.0


def _series_j(mu, x):
    """J_mu(x) by its ascending series; caller guarantees x*x/4 <= mu + 1."""
    y = 0.25 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    comp = np.zeros_like(x)
    for k in range(1, 400):
        term = term * (-y) / (k * (mu + k))
        t = total + term
        comp += np.where(np.abs(total) >= np.abs(term), (total - t) + term, (term - t) + total)
        total = t
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    total = total + comp
    with np.errstate(divide="ignore"):
        logpre = mu * np.log(0.5 * x) - math.lgamma(mu + 1.0)
    return total * np.exp(logpre)


def _hankel_j(mu, x):
    """J_mu(x) from Hankel's expansion; caller guarantees x > max(30, nu**2)."""
    four_mu2 = 4.0 * mu * mu
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    for k in range(1, 200):
        term = term * (four_mu2 - (2 * k - 1) ** 2) / (8.0 * k * x)
        if k % 2:
            q += term if (k // 2) % 2 == 0 else -term
        else:
            p += -term if (k // 2) % 2 else term
        if np.all(np.abs(term) <= 1e-17):
            break
    chi = x - (0.5 * mu + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def miller_start(nu, x):
    """Integer offset N so that backward recurrence from order frac(nu)+N is converged at x."""
    nu0 = nu - math.floor(nu)
    k = max(int(math.floor(nu)) + 1, int(math.ceil(x)) + 1)
    p_prev, p = 0.0, 1.0
    while abs(p) < 1e20:
        p_prev, p = p, 2.0 * (nu0 + k) / x * p - p_prev
        k += 1
    return k + 5


def _neumann_weights(nu0, half):
    """b_i = Gamma(nu0+i)/(i! Gamma(nu0+1)) for i = 0..half, b_0 unused (set to 1)."""
    b = np.ones(half + 1)
    for i in range(2, half + 1):
        b[i] = b[i - 1] * (nu0 + i - 1) / i
    return b


def _miller_pair(nu, x):
    n_int = int(math.floor(nu))
    nu0 = nu - n_int
    big = miller_start(nu, float(np.max(x)))
    b = _neumann_weights(nu0, big // 2 + 1)

    j_next = np.zeros_like(x)      # order nu0 + k + 1
    j = np.ones_like(x)            # order nu0 + k
    shift = np.zeros(x.shape, dtype=np.int64)
    s = np.zeros_like(x)
    c = np.zeros_like(x)
    cap_nu = np.zeros_like(x)
    cap_nu_shift = np.zeros(x.shape, dtype=np.int64)
    cap_nm1 = np.zeros_like(x)
    cap_nm1_shift = np.zeros(x.shape, dtype=np.int64)

    def accumulate(k, val):
        nonlocal s, c
        if k % 2:
            return
        i = k // 2
        v = val if i == 0 else (nu0 + k) * b[i] * val
        t = s + v
        c = c + np.where(np.abs(s) >= np.abs(v), (s - t) + v, (v - t) + s)
        s = t

    accumulate(big, j)
    if big == n_int:
        cap_nu = j.copy()
    for k in range(big, 0, -1):
        j_prev = 2.0 * (nu0 + k) / x * j - j_next
        j_next, j = j, j_prev
        order = k - 1
        accumulate(order, j)
        if order == n_int:
            cap_nu = j.copy()
            cap_nu_shift = shift.copy()
        if order == n_int - 1:
            cap_nm1 = j.copy()
            cap_nm1_shift = shift.copy()
        over = np.abs(j) > _RESCALE
        if over.any():
            f = np.where(over, 1.0 / _RESCALE, 1.0)
            j *= f
            j_next *= f
            s *= f
            c *= f
            shift += over
    if n_int == 0:
        # order nu0 - 1 from orders nu0 and nu0 + 1
        cap_nm1 = 2.0 * nu0 / x * j - j_next
        cap_nm1_shift = shift.copy()
    total = s + c
    log_norm = nu0 * np.log(0.5 * x) - math.lgamma(nu0 + 1.0)

    def finish(cap, cap_shift):
        d = shift - cap_shift
        with np.errstate(divide="ignore", under="ignore"):
            mag = np.log(np.abs(cap)) - np.log(np.abs(total)) + log_norm - d * _RESCALE_LOG
            return np.sign(cap) * np.sign(total) * np.exp(mag)

    return finish(cap_nu, cap_nu_shift), finish(cap_nm1, cap_nm1_shift)


def bessel_pair(nu, x):
    nu = float(nu)
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    j_nu = np.empty_like(x)
    j_nm1 = np.empty_like(x)
    series = 0.25 * x * x <= nu + 1.0
    hankel = ~series & (x > max(_HANKEL_MIN_X, nu * nu))
    miller = ~series & ~hankel
    if series.any():
        xs = x[series]
        a = _series_j(nu, xs)
        j_nu[series] = a
        j_nm1[series] = 2.0 * nu / xs * a - _series_j(nu + 1.0, xs)
    if hankel.any():
        xh = x[hankel]
        j_nu[hankel] = _hankel_j(nu, xh)
        j_nm1[hankel] = _hankel_j(nu - 1.0, xh)
    if miller.any():
        a, b = _miller_pair(nu, x[miller])
        j_nu[miller] = a
        j_nm1[miller] = b
    return j_nu, j_nm1


def hermite_coeffs(u, alpha, extended=True):
    """Product-basis coefficients H_1..H_M of the Hermite interpolant of exp(alpha*z).

    ``u`` holds u_1..u_M (nonpositive, nonincreasing, each value at most twice).
    With ``t`` the nodes reversed (t_0 = u_M), the table entry
    E[i,k] = f[t_i..t_{i+k}] * prod_{l=i}^{i+k-1} (-t_l) obeys

        E[i,k] = ((-t_i) E[i+1,k-1] - (-t_{i+k-1}) E[i,k-1]) / (t_{i+k} - t_i)

    and E[0,M-k] = H_k.  Returns ``(hi, lo)`` arrays indexed by k-1.
    """
    t = np.asarray(u, dtype=np.float64)[::-1].copy()
    m = t.size
    out_hi = np.empty(m)
    out_lo = np.zeros(m)
    if extended:
        col = dd.exp(dd.two_prod(t, np.full(m, float(alpha))))
        col = (np.asarray(col[0], dtype=np.float64), np.asarray(col[1], dtype=np.float64))
    else:
        col = (np.exp(alpha * t), np.zeros(m))
    out_hi[m - 1], out_lo[m - 1] = col[0][0], col[1][0]
    for k in range(1, m):
        ti = t[: m - k]
        tik = t[k:]
        tlast = t[k - 1: m - 1]
        upper = (col[0][1:], col[1][1:])
        lower = (col[0][:-1], col[1][:-1])
        same = tik == ti
        if extended:
            num = dd.sub(dd.mul_float(upper, -ti), dd.mul_float(lower, -tlast))
            den = dd.two_sum(tik, -ti)
            den = (np.where(same, 1.0, den[0]), np.where(same, 0.0, den[1]))
            new = dd.div(num, den)
            if same.any():
                # repeated node (only possible for k == 1): derivative alpha*exp(alpha*t)
                deriv = dd.mul_float(dd.mul_float(lower, -ti), float(alpha))
                new = (np.where(same, deriv[0], new[0]), np.where(same, deriv[1], new[1]))
        else:
            with np.errstate(invalid="ignore", divide="ignore"):
                new_hi = ((-ti) * upper[0] - (-tlast) * lower[0]) / (tik - ti)
            if same.any():
                new_hi = np.where(same, (-ti) * alpha * lower[0], new_hi)
            new = (new_hi, np.zeros_like(new_hi))
        col = new
        out_hi[m - 1 - k], out_lo[m - 1 - k] = col[0][0], col[1][0]
    return out_hi, out_lo


def horner_eval(h_hi, h_lo, u, z):
    """Value and z-derivative of sum_k H_k prod_{j>k} (1 - z/u_j) at each z (double-double)."""
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    one = dd.from_float(np.ones_like(z))
    acc = (np.full_like(z, h_hi[0]), np.full_like(z, h_lo[0]))
    dacc = dd.from_float(np.zeros_like(z))
    for k in range(1, len(u)):
        uk = float(u[k])
        ratio = dd.div_float(dd.from_float(z), uk)
        factor = dd.sub(one, ratio)
        # d/dz [(1 - z/u_k) acc] = (1 - z/u_k) acc' - acc/u_k
        dacc = dd.sub(dd.mul(factor, dacc), dd.div_float(acc, uk))
        acc = dd.add(dd.mul(factor, acc), (h_hi[k], h_lo[k]))
    return dd.to_float(acc), dd.to_float(dacc)
