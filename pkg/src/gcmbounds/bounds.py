"""Energy bounds for Gaussian potentials f(t) = exp(-alpha t^2) in R^n.

Every bound is carried in log space and exponentiated only at the end, since
the individual factors (Gamma(n/2+1)^2, lambda^(n-2), ...) overflow binary64
long before n = 500.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import dd
from .errors import ConvergenceError, DomainError
from .specfun import (
    ball_radius,
    bessel_zeros,
    log_ball_volume,
    log_gamma,
    log_gamma_dd,
    log_reg_gamma_upper,
)

__all__ = [
    "AsymptoticProfile",
    "AsymptoticRates",
    "BoundParams",
    "BoundResult",
    "FOUR_PI_OVER_E",
    "PI_E",
    "asymptotic_rate",
    "conditional_expectation_bound",
    "dual_cap",
    "expectation_bound",
    "gaussian_profile",
    "general_truncated_expectation",
    "inverse_power_lower_bound",
    "inverse_power_upper_bound",
    "main_bound_log_terms",
    "main_lower_bound",
    "normalized_main_bound",
    "profile_agreement",
]

FOUR_PI_OVER_E = 4.0 * math.pi / math.e
PI_E = math.pi * math.e

KINDS = (
    "main_lower",
    "normalized_main",
    "expectation",
    "cond_expectation",
    "truncated_expectation",
    "dual_cap",
    "invpow_upper",
    "invpow_lower",
    "asymptotic_rate",
    "lp_via_aux",
    "lattice_energy",
)

# beyond this many summands the main series is declared divergent
_MAX_TERMS_BASE = 10000
# rigorous lower bound on consecutive zero spacing used by the tail majorant
_SPACING = 0.5 * math.pi
# dimensions from which the double-double prefactor path is the default
_EXTENDED_FROM_N = 200


def _positive(name, value):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise DomainError(f"{name} must be a positive real, got {value!r}") from None
    if not (value > 0.0) or not math.isfinite(value):
        raise DomainError(f"{name} must be a positive real, got {value!r}")
    return value


def _dimension(n):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    return int(n)


@dataclass(frozen=True)
class BoundParams:
    """Dimension, Gaussian steepness and density; ``r`` is derived.

    ``r`` is the diameter of the ball of volume ``rho``:
    vol(B_{r/2}) = rho.
    """

    n: int
    alpha: float
    rho: float
    r: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "n", _dimension(self.n))
        object.__setattr__(self, "alpha", _positive("alpha", self.alpha))
        object.__setattr__(self, "rho", _positive("rho", self.rho))
        object.__setattr__(self, "r", 2.0 * ball_radius(self.n, math.log(self.rho)))

    @property
    def nu(self):
        return 0.5 * self.n

    @property
    def decay(self):
        """Coefficient a in exp(-a lambda^2) = f(lambda/(pi r))."""
        return self.alpha / (math.pi * self.r) ** 2

    def with_alpha(self, alpha):
        return BoundParams(self.n, alpha, self.rho)


@dataclass(frozen=True)
class BoundResult:
    value: float
    log_value: float
    kind: str
    terms_used: int = 0
    tail_bound: float = 0.0
    params: Optional[BoundParams] = None
    notes: tuple = ()
    extras: dict = field(default_factory=dict)

    def as_dict(self):
        p = self.params
        return {
            "kind": self.kind,
            "n": p.n if p else self.extras.get("n"),
            "alpha": p.alpha if p else self.extras.get("alpha"),
            "rho": p.rho if p else self.extras.get("rho"),
            "value": self.value,
            "log_value": self.log_value,
            "terms_used": self.terms_used,
            "tail_bound": self.tail_bound,
            "notes": list(self.notes),
        }


def _result(log_value, kind, params=None, **kw):
    value = math.exp(log_value) if log_value < 709.0 else math.inf
    return BoundResult(value=value, log_value=log_value, kind=kind, params=params, **kw)


# ---------------------------------------------------------------------------
# main series

def _log_prefactor(n, extended):
    """ln n - (n-1) ln 2 - 2 ln Gamma(n/2+1), as a double-double pair."""
    if not extended:
        return (math.log(n) - (n - 1) * math.log(2.0) - 2.0 * math.lgamma(0.5 * n + 1.0), 0.0)
    lg = log_gamma_dd(0.5 * n + 1.0)
    res = dd.log(dd.from_float(float(n)))
    res = dd.sub(res, dd.mul_float(dd.LN2, float(n - 1)))
    res = dd.sub(res, dd.mul_float(lg, 2.0))
    return float(res[0]), float(res[1])


def main_bound_log_terms(params, count, extended=False):
    """ln of the first ``count`` summands of the main series.

    Returns ``(log_terms, zeros)``; log_terms is a double-double pair of arrays.
    """
    n = params.n
    table = bessel_zeros(params.nu, count)
    lam = np.asarray(table.zeros)
    comp = np.asarray(table.companion_values)
    a = params.decay
    pre = _log_prefactor(n, extended)
    log_j = np.log(np.abs(comp))
    if extended:
        log_lam = dd.log(dd.from_float(lam))
        t = dd.mul_float(log_lam, float(n - 2))
        t = dd.add(t, (np.full_like(lam, pre[0]), np.full_like(lam, pre[1])))
        t = dd.sub(t, dd.mul_float(dd.from_float(log_j), 2.0))
        sq = dd.two_prod(lam, lam)
        t = dd.sub(t, dd.mul_float(sq, a))
        return (np.asarray(t[0]), np.asarray(t[1])), lam
    t = pre[0] + (n - 2) * np.log(lam) - 2.0 * log_j - a * lam * lam
    return (t, np.zeros_like(t)), lam


def _tail_log_majorant(params, lam, log_terms):
    """ln of a bound on sum_{k>m} T_k, per m; -inf-safe (nan where not applicable).

    With G(x) = (n-1) ln x - a x^2 concave, zero spacing >= pi/2 and the weight
    1/(x J_{nu-1}(x)^2) nonincreasing along the zeros (nu >= 1/2), every later
    term is at most T_m q^(k-m) with q = exp(G'(lambda_m) pi/2).
    """
    a = params.decay
    gprime = (params.n - 1) / lam - 2.0 * a * lam
    log_q = gprime * _SPACING
    out = np.full_like(lam, np.nan)
    ok = gprime < 0
    lq = log_q[ok]
    out[ok] = log_terms[ok] + lq - np.log(-np.expm1(lq))
    return out


def _estimate_count(params, tol):
    a = params.decay
    nu = params.nu
    lam_peak = math.sqrt(max(params.n - 1, 1) / (2.0 * a))
    width = math.sqrt((math.log(1.0 / tol) + 60.0 + 0.5 * params.n) / a)
    lam_end = lam_peak + width
    return max(8, int(math.ceil(lam_end / math.pi - 0.5 * nu + 0.25)) + 8)


def _sum_log_terms(t_hi, t_lo):
    """log of sum(exp(t)) using a shift and a correctly rounded fsum."""
    shift_hi = float(np.max(t_hi))
    rel = (t_hi - shift_hi) + t_lo
    total = math.fsum(np.exp(rel).tolist())
    return shift_hi + math.log(total)


def main_lower_bound(params, tol=1e-12, extended=None):
    """The Bessel-zero series lower bound on the Gaussian energy.

    Terms are summed until m is at least twice the index of the largest term
    and a rigorous majorant of the remainder is below ``tol`` times the partial
    sum.  ``extended`` selects the double-double prefactor path (default on
    for n >= 200).
    """
    tol = _positive("tol", tol)
    if tol > 1e-6:
        raise DomainError(f"tol must be at most 1e-6, got {tol!r}")
    if extended is None:
        extended = params.n >= _EXTENDED_FROM_N
    max_terms = 10 * params.n + _MAX_TERMS_BASE
    count = min(_estimate_count(params, tol), max_terms)
    log_tol = math.log(tol)
    while True:
        (t_hi, t_lo), lam = main_bound_log_terms(params, count, extended)
        logs = t_hi + t_lo
        shift = float(np.max(logs))
        partial = np.log(np.cumsum(np.exp(logs - shift))) + shift
        peak = int(np.argmax(logs)) + 1
        tail = _tail_log_majorant(params, lam, logs)
        idx = np.arange(1, count + 1)
        with np.errstate(invalid="ignore"):
            ok = (idx >= 2 * peak) & (tail <= partial + log_tol)
        ok &= ~np.isnan(tail)
        if ok.any():
            m = int(np.flatnonzero(ok)[0]) + 1
            log_value = _sum_log_terms(t_hi[:m], t_lo[:m])
            tail_bound = math.exp(tail[m - 1])
            notes = ("double-double prefactor",) if extended else ()
            return _result(log_value, "main_lower", params, terms_used=m,
                           tail_bound=tail_bound, notes=notes)
        if count >= max_terms:
            raise ConvergenceError(
                f"main series for n={params.n}, alpha={params.alpha}, rho={params.rho} "
                f"not converged within {max_terms} terms")
        count = min(2 * count, max_terms)


def normalized_main_bound(params, tol=1e-12, extended=None):
    """Main bound divided by the expectation factor (pi/alpha)^(n/2)."""
    res = main_lower_bound(params, tol, extended)
    shift = 0.5 * params.n * math.log(math.pi / params.alpha)
    return _result(res.log_value - shift, "normalized_main", params,
                   terms_used=res.terms_used, tail_bound=res.tail_bound * math.exp(-shift),
                   notes=res.notes)


# ---------------------------------------------------------------------------
# closed forms

def _log_expectation(params):
    return math.log(params.rho) + 0.5 * params.n * math.log(math.pi / params.alpha)


def expectation_bound(params):
    """rho (pi/alpha)^(n/2): mean energy of a random lattice."""
    return _result(_log_expectation(params), "expectation", params)


def general_truncated_expectation(params, r_cut, k_div=2.0):
    """Expectation restricted to |x| >= r_cut, rescaled by 1/(1 - vol(B_r_cut)/k_div)."""
    r_cut = float(r_cut)
    k_div = float(k_div)
    if not (r_cut >= 0.0) or not math.isfinite(r_cut):
        raise DomainError(f"r_cut must be a nonnegative real, got {r_cut!r}")
    if not (k_div >= 2.0) or not math.isfinite(k_div):
        raise DomainError(f"k_div must be a real >= 2, got {k_div!r}")
    n = params.n
    if r_cut == 0.0:
        log_vol = -math.inf
    else:
        log_vol = log_ball_volume(n, r_cut)
    ratio = math.exp(log_vol - math.log(k_div))
    if ratio >= 1.0:
        raise DomainError(
            f"ball volume {math.exp(log_vol)!r} of radius r_cut must stay below k_div={k_div}")
    log_q = log_reg_gamma_upper(0.5 * n, params.alpha * r_cut * r_cut)
    log_value = _log_expectation(params) - math.log1p(-ratio) + log_q
    return _result(log_value, "truncated_expectation", params)


def conditional_expectation_bound(params):
    """Expectation conditioned on no short vectors, vol(B_rc) = 1/n, divisor 2."""
    n = params.n
    if n <= 1:
        raise DomainError("conditional expectation bound needs n > 1")
    r_c = ball_radius(n, -math.log(n))
    log_q = log_reg_gamma_upper(0.5 * n, params.alpha * r_c * r_c)
    log_value = _log_expectation(params) - math.log1p(-0.5 / n) + log_q
    return _result(log_value, "cond_expectation", params, extras={"r_c": r_c})


def dual_cap(params):
    """rho times the Gaussian mass outside the ball of volume 1/rho."""
    n = params.n
    r_d = ball_radius(n, -math.log(params.rho))
    log_q = log_reg_gamma_upper(0.5 * n, params.alpha * r_d * r_d)
    return _result(_log_expectation(params) + log_q, "dual_cap", params, extras={"r_d": r_d})


# ---------------------------------------------------------------------------
# asymptotics

@dataclass(frozen=True)
class AsymptoticRates:
    alpha: float
    lower_rate: float
    upper_rate: float


def asymptotic_rate(alpha):
    """n-th root growth rates of the lower and upper bounds as n grows."""
    alpha = _positive("alpha", alpha)
    base = math.sqrt(math.pi / alpha)
    if alpha < FOUR_PI_OVER_E:
        lower = base
    else:
        lower = 0.5 * math.exp(1.0 - alpha * math.e / (8.0 * math.pi))
    if alpha <= PI_E:
        upper = base
    else:
        upper = base * math.exp(0.5 - alpha / (2.0 * math.pi * math.e))
    return AsymptoticRates(alpha, lower, upper)


@dataclass(frozen=True)
class AsymptoticProfile:
    """Large-n shape of the main series summands.

    Summand m = c n + d sqrt(n), normalized by (pi/alpha)^(n/2), is close to
    rho exp(-pi K d^2) sqrt(K/n).  ``flagged`` is set when alpha >= 4pi/e;
    then c = 0 and K is nan.
    """

    n: int
    rho: float
    alpha: float
    c: float
    K: float
    t_m: float
    flagged: bool

    @property
    def peak_index(self):
        return self.c * self.n

    def predicted_term(self, d):
        d = np.asarray(d, dtype=np.float64)
        out = self.rho * np.exp(-math.pi * self.K * d * d) * math.sqrt(self.K / self.n)
        return float(out) if out.ndim == 0 else out

    def predicted_log_term(self, d):
        d = np.asarray(d, dtype=np.float64)
        return math.log(self.rho) - math.pi * self.K * d * d + 0.5 * math.log(self.K / self.n)


def gaussian_profile(params):
    alpha = params.alpha
    t_m = math.sqrt(4.0 * math.pi / (alpha * math.e))
    if alpha >= FOUR_PI_OVER_E:
        return AsymptoticProfile(params.n, params.rho, alpha, 0.0, math.nan, t_m, True)
    c = (math.sqrt(t_m * t_m - 1.0) - math.acos(1.0 / t_m)) / (2.0 * math.pi)
    K = 4.0 * math.pi * alpha / (FOUR_PI_OVER_E - alpha)
    return AsymptoticProfile(params.n, params.rho, alpha, c, K, t_m, False)


def profile_agreement(params, window, detail=False):
    """max |actual/predicted - 1| over summands with |d| <= window.

    The summands compared are those at integers m >= 1 with
    d = (m - c n)/sqrt(n) inside the window.
    """
    window = _positive("window", window)
    prof = gaussian_profile(params)
    if prof.flagged:
        raise DomainError("the Gaussian profile needs alpha < 4pi/e")
    n = params.n
    if prof.peak_index < 5.0:
        raise DomainError(f"profile comparison needs c*n >= 5, got {prof.peak_index:.3g}")
    sq = math.sqrt(n)
    m_hi = int(math.floor(prof.peak_index + window * sq))
    m_lo = max(1, int(math.ceil(prof.peak_index - window * sq)))
    (t_hi, t_lo), _ = main_bound_log_terms(params, m_hi, extended=n >= _EXTENDED_FROM_N)
    shift = 0.5 * n * math.log(math.pi / params.alpha)
    m = np.arange(m_lo, m_hi + 1)
    actual = (t_hi[m - 1] + t_lo[m - 1]) - shift
    d = (m - prof.peak_index) / sq
    pred = prof.predicted_log_term(d)
    dev = np.abs(np.expm1(actual - pred))
    if detail:
        return float(np.max(dev)), {"m": m, "d": d, "log_actual": actual, "log_predicted": pred}
    return float(np.max(dev))


# ---------------------------------------------------------------------------
# inverse power laws f(t) = t^-(n+s)

def _check_s(s):
    try:
        s = float(s)
    except (TypeError, ValueError):
        raise DomainError(f"s must be a positive real, got {s!r}") from None
    if not (s > 0.0) or not math.isfinite(s):
        raise DomainError(f"s must be a positive real, got {s!r}")
    return s


def inverse_power_upper_bound(n, s, rho):
    """Truncated-expectation upper bound for t^-(n+s) with vol(B_r) = 1/n.

    ``extras`` carries the large-n form (2 rho/s) pi^((n+s)/2) e^(s/2) / Gamma((n+s)/2).
    """
    n = _dimension(n)
    s = _check_s(s)
    rho = _positive("rho", rho)
    if n <= 1:
        raise DomainError("inverse power upper bound needs n > 1")
    r = ball_radius(n, -math.log(n))
    log_exact = (math.log(rho) - math.log1p(-0.5 / n) + math.log(n) + 0.5 * n * math.log(math.pi)
                 - math.lgamma(0.5 * n + 1.0) - s * math.log(r) - math.log(s))
    log_asym = (math.log(2.0 * rho / s) + 0.5 * (n + s) * math.log(math.pi) + 0.5 * s
                - math.lgamma(0.5 * (n + s)))
    extras = {"n": n, "rho": rho, "s": s,
              "asymptotic_log_value": log_asym, "asymptotic_value": math.exp(log_asym)}
    return _result(log_exact, "invpow_upper", None, extras=extras)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)
# below this alpha the main series equals rho (pi/alpha)^(n/2) - 1 up to a
# relative error of about exp(-_BANDLIMIT_EXP)
_BANDLIMIT_EXP = 200.0


def _gl_panels(fun, a, b, panels):
    edges = np.linspace(a, b, panels + 1)
    total = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        x = lo + half * (_GL_NODES + 1.0)
        total.extend((half * _GL_WEIGHTS * fun(x)).tolist())
    return math.fsum(total)


def inverse_power_lower_bound(n, s, rho, tol=1e-8, main_tol=1e-12):
    """Lower bound for t^-(n+s) from integrating the Gaussian lower bound over alpha.

    On [0, alpha0] the Gaussian is numerically band-limited and the main series
    equals rho (pi/alpha)^(n/2) - 1, which is integrated in closed form; on
    [alpha0, 4pi/e] composite 20-point Gauss-Legendre panels are doubled until
    the estimate changes by less than ``tol`` relative.
    """
    n = _dimension(n)
    s = _check_s(s)
    rho = _positive("rho", rho)
    tol = _positive("tol", tol)
    half = 0.5 * (n + s)
    lg = math.lgamma(half)
    r = BoundParams(n, 1.0, rho).r
    alpha0 = min(FOUR_PI_OVER_E, (math.pi * r) ** 2 / (4.0 * _BANDLIMIT_EXP))

    # closed-form piece: int_0^alpha0 (rho pi^(n/2) alpha^(s/2-1) - alpha^(half-1)) / Gamma(half)
    head = (rho * math.pi ** (0.5 * n) * alpha0 ** (0.5 * s) / (0.5 * s)
            - alpha0 ** half / half) * math.exp(-lg)

    cache = {}

    def integrand(alphas):
        out = np.empty_like(alphas)
        for i, al in enumerate(alphas):
            key = float(al)
            if key not in cache:
                res = main_lower_bound(BoundParams(n, key, rho), tol=main_tol)
                cache[key] = math.exp(res.log_value + (half - 1.0) * math.log(key) - lg)
            out[i] = cache[key]
        return out

    panels = 1
    prev = _gl_panels(integrand, alpha0, FOUR_PI_OVER_E, panels)
    while True:
        panels *= 2
        cur = _gl_panels(integrand, alpha0, FOUR_PI_OVER_E, panels)
        change = abs(cur - prev)
        if change <= tol * abs(head + cur):
            break
        if panels >= 256:
            raise ConvergenceError(
                f"inverse power quadrature not converged (n={n}, s={s}): change {change:.3g}")
        prev = cur
    value = head + cur
    return _result(math.log(value), "invpow_lower", None, terms_used=len(cache),
                   tail_bound=change,
                   extras={"n": n, "rho": rho, "s": s, "alpha0": alpha0, "panels": panels,
                           "closed_form_part": head})
