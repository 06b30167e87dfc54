"""Real-order special functions: Bessel J and its zeros, Airy zeros,
log-gamma, the regularized upper incomplete gamma function and ball volumes.

Everything works in binary64 except the optional double-double log-gamma.
The hot loops (Bessel recurrences) live in the kernel backend, see
``gcmbounds._kernels``.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import dd
from ._kernels import bessel_pair
from .errors import ConvergenceError, DomainError

__all__ = [
    "AiryZeroApprox",
    "BesselZeroTable",
    "airy_zero",
    "ball_radius",
    "bessel_j",
    "bessel_j_pair",
    "bessel_zeros",
    "log_ball_volume",
    "log_gamma",
    "log_gamma_dd",
    "log_reg_gamma_upper",
    "olver_z",
    "reg_gamma_upper",
]


# ---------------------------------------------------------------------------
# Bessel J

def _check_x(x):
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"Bessel argument must be positive and finite, got {x!r}")
    return arr


def bessel_j_pair(order, x):
    """Return ``(J_order(x), J_{order-1}(x))``.

    Negative orders down to -1 are reached through the pair at ``order + 1``,
    so ``order`` may be any real >= -1.
    """
    order = float(order)
    if not math.isfinite(order) or order < -1.0:
        raise DomainError(f"Bessel order must be >= -1, got {order!r}")
    arr = _check_x(x)
    flat = arr.reshape(-1)
    if order >= 0.0:
        a, b = bessel_pair(order, flat)
    else:
        up, a = bessel_pair(order + 1.0, flat)
        # J_{v-1} = (2v/x) J_v - J_{v+1}
        b = 2.0 * order / flat * a - up
    if arr.ndim == 0:
        return float(a[0]), float(b[0])
    return a.reshape(arr.shape), b.reshape(arr.shape)


def bessel_j(order, x):
    """J_order(x) for real ``order >= 0`` and ``x > 0`` (scalar or array)."""
    if float(order) < 0.0:
        raise DomainError(f"Bessel order must be nonnegative, got {order!r}")
    return bessel_j_pair(order, x)[0]


# ---------------------------------------------------------------------------
# Airy zeros

@dataclass(frozen=True)
class AiryZeroApprox:
    """Asymptotic approximation of the m-th zero of Ai.

    ``series_order`` counts the correction terms after the leading power.
    """

    index: int
    value: float
    series_order: int = 2


def _airy_t(t):
    return t ** (2.0 / 3.0) * (1.0 + 5.0 / 48.0 * t ** -2 - 5.0 / 36.0 * t ** -4)


def airy_zero(m):
    """a_m ~ -T(3pi(4m-1)/8), truncated after the t**-4 correction.

    The truncation error is of the size of the next term,
    (77125/82944) t**(2/3 - 6): about 1e-3 at m = 1 and below 1e-6 from m = 4.
    """
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise DomainError(f"Airy zero index must be a positive integer, got {m!r}")
    m = int(m)
    t = 3.0 * math.pi * (4 * m - 1) / 8.0
    return AiryZeroApprox(index=m, value=-_airy_t(t))


def _airy_zeros_array(m):
    t = 3.0 * np.pi * (4.0 * np.asarray(m, dtype=np.float64) - 1.0) / 8.0
    return -_airy_t(t)


# ---------------------------------------------------------------------------
# Bessel zeros

def olver_z(w):
    """Solve sqrt(z**2 - 1) - arcsec(z) = w for z >= 1 (w >= 0, vectorized).

    With w = (2/3)(-zeta)**1.5 this inverts the large-order uniform map, so
    that the m-th zero of J_v is close to v*z at zeta = v**(-2/3) a_m.
    """
    w = np.asarray(w, dtype=np.float64)
    lo = np.ones_like(w)
    hi = w + 1.0 + 0.5 * np.pi
    z = np.where(w < 1.0, 1.0 + (1.5 * w) ** (2.0 / 3.0) / 2.0 ** (1.0 / 3.0), w + 0.5 * np.pi)
    z = np.clip(z, lo, hi)
    for _ in range(100):
        s = np.sqrt(z * z - 1.0)
        g = s - np.arccos(1.0 / z) - w
        lo = np.where(g < 0, z, lo)
        hi = np.where(g > 0, z, hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = g * z / s
        z_new = z - step
        bad = ~np.isfinite(z_new) | (z_new <= lo) | (z_new >= hi)
        z_new = np.where(bad, 0.5 * (lo + hi), z_new)
        if np.all(np.abs(z_new - z) <= 1e-15 * z_new):
            return z_new
        z = z_new
    return z


def _zero_guesses(nu, m):
    m = np.asarray(m, dtype=np.float64)
    if nu < 2.0:
        # McMahon
        mu = 4.0 * nu * nu
        beta = (m + 0.5 * nu - 0.25) * np.pi
        b8 = 8.0 * beta
        return beta - (mu - 1.0) / b8 - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8 ** 3)
    zeta = nu ** (-2.0 / 3.0) * _airy_zeros_array(m)
    w = (2.0 / 3.0) * (-zeta) ** 1.5
    return nu * olver_z(w)


@dataclass(frozen=True, eq=False)
class BesselZeroTable:
    """First zeros of J_order with J_{order-1} evaluated at each of them.

    ``zeros`` and ``companion_values`` are read-only numpy arrays.
    """

    order: float
    zeros: np.ndarray
    companion_values: np.ndarray

    def __len__(self):
        return len(self.zeros)

    def head(self, count):
        if count > len(self):
            raise ValueError("table too short")
        return BesselZeroTable(self.order, self.zeros[:count], self.companion_values[:count])


_ZERO_CACHE: dict[float, BesselZeroTable] = {}
_ZERO_LOCK = threading.Lock()
_NEWTON_MAX = 50


def _compute_zeros(nu, count):
    idx = np.arange(1, count + 2)
    g = _zero_guesses(nu, idx)
    lo = np.empty(count)
    lo[0] = 0.5 * (nu + g[0]) if nu > 0 else 0.5 * g[0]
    lo[1:] = 0.5 * (g[:-2] + g[1:-1])
    hi = 0.5 * (g[:-1] + g[1:])
    x = g[:-1].copy()
    # sign of J_nu just left of the m-th zero is (-1)**(m-1)
    sign_lo = np.where(idx[:-1] % 2 == 1, 1.0, -1.0)
    done = np.zeros(count, dtype=bool)
    jm1 = np.empty(count)
    for _ in range(_NEWTON_MAX):
        act = ~done
        xa = x[act]
        jv, jp = bessel_pair(nu, xa)
        deriv = jp - nu / xa * jv
        same = np.sign(jv) == sign_lo[act]
        lo_a = np.where(same, xa, lo[act])
        hi_a = np.where(same, hi[act], xa)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = jv / deriv
        xn = xa - step
        conv = (np.abs(step) <= 4e-16 * xa) | (jv == 0.0) | (hi_a - lo_a <= 4e-16 * xa)
        bad = ~np.isfinite(xn) | (xn <= lo_a) | (xn >= hi_a)
        xn = np.where(conv, xa, np.where(bad, 0.5 * (lo_a + hi_a), xn))
        lo[act] = lo_a
        hi[act] = hi_a
        x[act] = xn
        jm1[act] = jp
        newly = np.flatnonzero(act)[conv]
        done[newly] = True
        if done.all():
            break
    if not done.all():
        m = int(np.flatnonzero(~done)[0]) + 1
        raise ConvergenceError(f"Bessel zero m={m} of order {nu} did not converge")
    jv, jm1 = bessel_pair(nu, x)
    expected = np.where(idx[:-1] % 2 == 1, -1.0, 1.0)
    wrong = (np.sign(jm1) != expected)
    wrong[1:] |= np.diff(x) <= 0
    if wrong.any():
        m = int(np.flatnonzero(wrong)[0]) + 1
        raise ConvergenceError(f"Bessel zero m={m} of order {nu} was not isolated")
    x.setflags(write=False)
    jm1.setflags(write=False)
    return BesselZeroTable(nu, x, jm1)


def bessel_zeros(order, count):
    """First ``count`` positive zeros of J_order, cached per order."""
    order = float(order)
    if not math.isfinite(order) or order < 0.0:
        raise DomainError(f"Bessel order must be nonnegative, got {order!r}")
    if isinstance(count, bool) or int(count) != count or count < 1:
        raise DomainError(f"zero count must be a positive integer, got {count!r}")
    count = int(count)
    with _ZERO_LOCK:
        table = _ZERO_CACHE.get(order)
    if table is not None and len(table) >= count:
        return table if len(table) == count else table.head(count)
    fresh = _compute_zeros(order, count)
    with _ZERO_LOCK:
        old = _ZERO_CACHE.get(order)
        if old is None or len(old) < count:
            _ZERO_CACHE[order] = fresh
    return fresh


# ---------------------------------------------------------------------------
# Gamma function family

def _check_positive(name, x):
    x = float(x)
    if not (x > 0.0) or not math.isfinite(x):
        raise DomainError(f"{name} must be positive and finite, got {x!r}")
    return x


def log_gamma(x, extended=False):
    """ln Gamma(x) for x > 0; ``extended=True`` rounds the double-double result."""
    x = _check_positive("log_gamma argument", x)
    if extended:
        return dd.to_float(log_gamma_dd(x))
    return math.lgamma(x)


_BERNOULLI = [
    Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30), Fraction(5, 66),
    Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510), Fraction(43867, 798),
    Fraction(-174611, 330), Fraction(854513, 138), Fraction(-236364091, 2730),
    Fraction(8553103, 6), Fraction(-23749461029, 870), Fraction(8615841276005, 14322),
]


def _frac_dd(q):
    return dd.div(dd.from_float(float(q.numerator)), dd.from_float(float(q.denominator)))


# Stirling coefficients B_2k / (2k (2k-1)) as double-doubles
_STIRLING = [_frac_dd(b / ((2 * k) * (2 * k - 1))) for k, b in enumerate(_BERNOULLI, start=1)]
_STIRLING_MIN_X = 30.0


def log_gamma_dd(x):
    """ln Gamma(x) as a double-double ``(hi, lo)`` pair for a binary64 x > 0.

    The argument is shifted above 30 with the recurrence and the Stirling
    series is summed with 15 correction terms (truncation below 1e-40).
    """
    x = _check_positive("log_gamma argument", x)
    shift = max(0, int(math.ceil(_STIRLING_MIN_X - x)))
    prod = dd.from_float(1.0)
    for i in range(shift):
        prod = dd.mul(prod, dd.two_sum(x, float(i)))
    y = dd.two_sum(x, float(shift))
    ln_y = dd.log(y)
    res = dd.sub(dd.mul(dd.add_float(y, -0.5), ln_y), y)
    res = dd.add(res, dd.LOG_2PI_HALF)
    inv = dd.div(dd.from_float(1.0), y)
    inv2 = dd.mul(inv, inv)
    power = inv
    for coef in _STIRLING:
        res = dd.add(res, dd.mul(coef, power))
        power = dd.mul(power, inv2)
    if shift:
        res = dd.sub(res, dd.log(prod))
    return float(res[0]), float(res[1])


_GAMMA_EPS = 1e-17
_GAMMA_MAXITER = 100000


def _log_series_p(s, x, log_pre):
    """ln P(s, x) by the power series (x < s + 1)."""
    term = 1.0 / s
    total = term
    comp = 0.0
    a = s
    for _ in range(_GAMMA_MAXITER):
        a += 1.0
        term *= x / a
        t = total + term
        comp += (total - t) + term
        total = t
        if term < _GAMMA_EPS * total:
            return log_pre + math.log(total + comp)
    raise ConvergenceError(f"incomplete gamma series did not converge for s={s}, x={x}")


def _log_cf_q(s, x, log_pre):
    """ln Q(s, x) by the Legendre continued fraction, modified Lentz (x >= s + 1)."""
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_MAXITER):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_EPS:
            return log_pre + math.log(h)
    raise ConvergenceError(f"incomplete gamma fraction did not converge for s={s}, x={x}")


def log_reg_gamma_upper(s, x):
    """ln Q(s, x); finite even where Q itself underflows."""
    s = _check_positive("incomplete gamma parameter s", s)
    x = float(x)
    if not (x >= 0.0) or math.isnan(x):
        raise DomainError(f"incomplete gamma argument must be nonnegative, got {x!r}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return -math.inf
    log_pre = s * math.log(x) - x - math.lgamma(s)
    if x < s + 1.0:
        lp = _log_series_p(s, x, log_pre)
        return math.log1p(-math.exp(lp)) if lp < -1e-300 else -math.inf
    return _log_cf_q(s, x, log_pre)


def reg_gamma_upper(s, x):
    """Q(s, x) = Gamma(s, x) / Gamma(s)."""
    return math.exp(log_reg_gamma_upper(s, x))


# ---------------------------------------------------------------------------
# Balls

def _check_dim(n):
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise DomainError(f"dimension must be a positive integer, got {n!r}")
    return int(n)


def log_ball_volume(n, radius):
    """ln of the volume of the n-dimensional ball of the given radius."""
    n = _check_dim(n)
    radius = _check_positive("radius", radius)
    return 0.5 * n * math.log(math.pi) + n * math.log(radius) - math.lgamma(0.5 * n + 1.0)


def ball_radius(n, log_volume):
    """Radius of the n-ball whose volume has logarithm ``log_volume``."""
    n = _check_dim(n)
    log_volume = float(log_volume)
    if not math.isfinite(log_volume):
        raise DomainError(f"log volume must be finite, got {log_volume!r}")
    return math.exp((log_volume - 0.5 * n * math.log(math.pi) + math.lgamma(0.5 * n + 1.0)) / n)
