"""Gaussian energies of reference lattices from their theta series.

A lattice scaled to density rho has energy sum_{l^2} N(l^2) exp(-alpha l^2 / s^2)
over its nonzero squared lengths l^2 in the standard presentation, with
s = (rho * covolume)^(1/n).
"""
from __future__ import annotations

import itertools
import math
import os
import tempfile
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bounds import BoundParams, _result
from .errors import ConvergenceError, DomainError
from .specfun import log_reg_gamma_upper

__all__ = [
    "LatticeModel",
    "A2",
    "D4",
    "E8",
    "Leech",
    "Zn",
    "lattice_energy",
    "lattice_model",
    "ramanujan_tau",
    "sigma",
    "theta_coefficients",
]

_TAU_MAX = 64


@dataclass(frozen=True)
class LatticeModel:
    """A lattice in its standard presentation.

    ``norm_step`` is the spacing of the possible squared lengths (1 for Z^n,
    2 for the even lattices) and ``min_norm`` the squared minimal length.
    """

    name: str
    dim: int
    det_covolume: float
    norm_step: int
    min_norm: int

    def norms(self, cache_dir=None):
        """Yield (l^2, N(l^2)) for l^2 = step, 2 step, ... without end."""
        have = 0
        limit = 32 * self.norm_step
        while True:
            for norm, count in theta_coefficients(self, limit, cache_dir):
                if norm > have:
                    yield norm, count
            have = limit
            limit *= 2


def Zn(n):
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise DomainError(f"Zn needs a positive integer dimension, got {n!r}")
    return LatticeModel(f"Z{int(n)}", int(n), 1.0, 1, 1)


def A2():
    # Gram matrix [[2, 1], [1, 2]]
    return LatticeModel("A2", 2, math.sqrt(3.0), 2, 2)


def D4():
    # integer vectors with even coordinate sum
    return LatticeModel("D4", 4, 2.0, 2, 2)


def E8():
    return LatticeModel("E8", 8, 1.0, 2, 2)


def Leech():
    return LatticeModel("Leech", 24, 1.0, 2, 4)


def lattice_model(name):
    """Model from a name such as 'Z3', 'A2', 'D4', 'E8' or 'Leech'."""
    key = str(name).strip()
    fixed = {"a2": A2, "d4": D4, "e8": E8, "leech": Leech, "lambda24": Leech}
    if key.lower() in fixed:
        return fixed[key.lower()]()
    if key[:1] in "zZ" and key[1:].isdigit():
        return Zn(int(key[1:]))
    raise DomainError(f"unknown lattice {name!r}; expected Zn, A2, D4, E8 or Leech")


# ---------------------------------------------------------------------------
# coefficients

def sigma(k, m):
    """Sum of the k-th powers of the divisors of m."""
    total = 0
    d = 1
    while d * d <= m:
        if m % d == 0:
            total += d ** k
            e = m // d
            if e != d:
                total += e ** k
        d += 1
    return total


def _poly_mul(a, b, size):
    out = [0] * size
    for i, ai in enumerate(a[:size]):
        if ai:
            for j, bj in enumerate(b[: size - i]):
                out[i + j] += ai * bj
    return out


@lru_cache(maxsize=None)
def _eta_product(size):
    """Coefficients of prod_{m>=1} (1 - q^m) up to q^(size-1), by the pentagonal theorem."""
    out = [0] * size
    k = 0
    while True:
        sign = -1 if k % 2 else 1
        done = True
        for g in ({k * (3 * k - 1) // 2, k * (3 * k + 1) // 2} if k else {0}):
            if g < size:
                out[g] += sign
                done = False
        if done:
            break
        k += 1
    return tuple(out)


def ramanujan_tau(m_max):
    """tau(1), ..., tau(m_max) from Delta = q prod (1 - q^m)^24."""
    if isinstance(m_max, bool) or int(m_max) != m_max or not 1 <= m_max <= _TAU_MAX:
        raise DomainError(f"m_max must be an integer in 1..{_TAU_MAX}, got {m_max!r}")
    return list(_tau_table(int(m_max)))


@lru_cache(maxsize=None)
def _tau_table(m_max):
    base = list(_eta_product(m_max))
    p2 = _poly_mul(base, base, m_max)
    p4 = _poly_mul(p2, p2, m_max)
    p8 = _poly_mul(p4, p4, m_max)
    p16 = _poly_mul(p8, p8, m_max)
    return tuple(_poly_mul(p16, p8, m_max))


def _tau_any(m_max):
    """Like ramanujan_tau but without the user-facing size cap."""
    return _tau_table(int(m_max))


def _zn_counts(n, max_norm):
    """r_n(k) for k = 0..max_norm from the n-th power of theta_3."""
    theta = [0] * (max_norm + 1)
    k = 0
    while k * k <= max_norm:
        theta[k * k] += 1 if k == 0 else 2
        k += 1
    result = [1] + [0] * max_norm
    power = theta
    e = n
    while e:
        if e & 1:
            result = _poly_mul(result, power, max_norm + 1)
        e >>= 1
        if e:
            power = _poly_mul(power, power, max_norm + 1)
    return result


def _box_counts(name, max_norm):
    """Shell counts by enumerating lattice vectors in a box large enough for max_norm."""
    counts = [0] * (max_norm + 1)
    if name == "A2":
        # i^2+ij+j^2 <= N/2 forces |i|, |j| <= sqrt(2N/3)
        b = int(math.isqrt(2 * max_norm // 3 + 1)) + 1
        r = np.arange(-b, b + 1)
        i, j = np.meshgrid(r, r, indexing="ij")
        q = (2 * (i * i + i * j + j * j)).ravel()
    elif name == "D4":
        b = int(math.isqrt(max_norm)) + 1
        r = np.arange(-b, b + 1)
        g = np.meshgrid(r, r, r, r, indexing="ij")
        q = sum(x * x for x in g).ravel()
        q = q[(sum(g).ravel() % 2) == 0]
    else:
        raise DomainError(f"no enumeration for {name}")
    q = q[q <= max_norm]
    binc = np.bincount(q, minlength=max_norm + 1)
    for k in range(max_norm + 1):
        counts[k] = int(binc[k])
    return counts


def _formula_counts(model, max_norm):
    half = max_norm // 2
    out = {}
    if model.name == "E8":
        for m in range(1, half + 1):
            out[2 * m] = 240 * sigma(3, m)
    else:
        tau = _tau_any(max(half, 1))
        for m in range(1, half + 1):
            num = 65520 * (sigma(11, m) - tau[m - 1])
            q, rem = divmod(num, 691)
            if rem:
                raise ArithmeticError(f"Leech count at norm {2 * m} is not an integer")
            out[2 * m] = q
    return out


def _compute_coefficients(model, max_norm):
    step = model.norm_step
    if model.name.startswith("Z"):
        r = _zn_counts(model.dim, max_norm)
        return [(k, r[k]) for k in range(1, max_norm + 1)]
    if model.name in ("A2", "D4"):
        c = _box_counts(model.name, max_norm)
        return [(k, c[k]) for k in range(step, max_norm + 1, step)]
    c = _formula_counts(model, max_norm)
    return [(k, c[k]) for k in range(step, max_norm + 1, step)]


def _cache_path(cache_dir, model):
    return os.path.join(cache_dir, f"theta_{model.name}.txt")


def _read_cache(path, max_norm):
    try:
        with open(path, encoding="ascii") as fh:
            rows = [tuple(int(v) for v in line.split()) for line in fh if line.strip()]
    except (OSError, ValueError):
        return None
    if not rows or rows[-1][0] < max_norm or any(len(r) != 2 for r in rows):
        return None
    return [r for r in rows if r[0] <= max_norm]


def _write_cache(path, rows):
    directory = os.path.dirname(path)
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".theta_", suffix=".txt")
    with os.fdopen(fd, "w", encoding="ascii") as fh:
        fh.writelines(f"{norm} {count}\n" for norm, count in rows)
    os.replace(tmp, path)


def theta_coefficients(model, max_norm, cache_dir=None):
    """[(l^2, N(l^2))] for the nonzero squared lengths l^2 <= max_norm on the model's norm grid.

    Zero counts are included (e.g. norm 2 of the Leech lattice).  With
    ``cache_dir`` the table is read from, or written to, a plain text file
    of "norm count" lines.
    """
    if isinstance(max_norm, bool) or int(max_norm) != max_norm:
        raise DomainError(f"max_norm must be an integer, got {max_norm!r}")
    max_norm = int(max_norm)
    if max_norm < model.min_norm:
        raise DomainError(f"max_norm {max_norm} is below the minimal norm {model.min_norm} of {model.name}")
    if cache_dir is not None:
        path = _cache_path(cache_dir, model)
        rows = _read_cache(path, max_norm)
        if rows is not None:
            return rows
        rows = _compute_coefficients(model, max_norm)
        _write_cache(path, rows)
        return rows
    return _compute_coefficients(model, max_norm)


# ---------------------------------------------------------------------------
# energies

def _log_tail_majorant(model, a, norm):
    """ln of a bound on sum over l^2 > norm of N(l^2) exp(-a l^2).

    Balls of radius delta = sqrt(min_norm)/2 about lattice points are
    disjoint, so at most ((t + delta)/delta)^n points have length <= t.
    Summation by parts then gives the bound
    (1 + delta/L)^n delta^(-n) a^(-n/2) Gamma(n/2 + 1, a L^2), L^2 = norm.
    """
    n = model.dim
    delta = 0.5 * math.sqrt(model.min_norm)
    length = math.sqrt(norm)
    s = 0.5 * n + 1.0
    return (n * math.log1p(delta / length) - n * math.log(delta) - 0.5 * n * math.log(a)
            + math.lgamma(s) + log_reg_gamma_upper(s, a * norm))


def _zn_energy(model, a, tol):
    # theta_3(q)^n - 1 with q = exp(-a)
    n = model.dim
    terms = []
    k = 1
    while True:
        terms.append(2.0 * math.exp(-a * k * k))
        partial = math.fsum(terms)
        # sum_{j>k} q^{j^2} <= q^{(k+1)^2} / (1 - q^{2k+3})
        tail_log = -a * (k + 1) ** 2 - math.log(-math.expm1(-a * (2 * k + 3)))
        tail = 2.0 * math.exp(tail_log)
        value = math.expm1(n * math.log1p(partial))
        # (1+x)^n is convex, so its slope at partial + tail bounds the omitted part
        bound = n * math.exp((n - 1) * math.log1p(partial + tail)) * tail
        if value > 0 and bound <= tol * value:
            return value, k, bound
        k += 1
        if k > 10_000_000:
            raise ConvergenceError(f"theta series for {model.name} did not converge")


def lattice_energy(model, alpha, rho, tol=1e-12, cache_dir=None):
    """Gaussian energy of the model lattice scaled to density rho."""
    tol = float(tol)
    if not (0 < tol <= 1e-10):
        raise DomainError(f"tol must be in (0, 1e-10], got {tol!r}")
    params = BoundParams(model.dim, alpha, rho)
    log_s2 = 2.0 * (math.log(params.rho) + math.log(model.det_covolume)) / model.dim
    a = params.alpha * math.exp(-log_s2)
    if model.name.startswith("Z"):
        value, used, bound = _zn_energy(model, a, tol)
        return _result(math.log(value), "lattice_energy", params, terms_used=used, tail_bound=bound,
                       notes=(model.name, "theta_3 power"))
    terms = []
    used = 0
    for norm, count in model.norms(cache_dir):
        used += 1
        if count:
            terms.append(count * math.exp(-a * norm))
        partial = math.fsum(terms)
        log_tail = _log_tail_majorant(model, a, norm)
        if partial > 0 and log_tail <= math.log(tol * partial):
            return _result(math.log(partial), "lattice_energy", params, terms_used=used,
                           tail_bound=math.exp(log_tail), notes=(model.name,))
        if used > 1_000_000:
            break
    raise ConvergenceError(f"energy sum for {model.name} did not converge")
