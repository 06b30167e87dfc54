"""Hermite interpolation of exp(alpha z) at doubled Bessel-zero nodes.

With z = -t^2, the interpolant p_M is a polynomial stand-in for the radial
auxiliary function h whose Fourier-side value rho*h^(0) - h(0) reproduces the
main series bound.  Coefficients are kept in the product basis

    p_M(z) = sum_{k=1}^{M} H_k prod_{j=k+1}^{M} (1 - z/u_j),

in which every H_k is nonnegative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import hermite_coeffs, horner_eval
from .bounds import BoundParams, _log_prefactor, _result, main_lower_bound
from .errors import ConvergenceError, DomainError, PrecisionError
from .specfun import bessel_j_pair, bessel_zeros, log_ball_volume

__all__ = [
    "AuxFunction",
    "MinorantReport",
    "NodeCollisionError",
    "alg_identity_residual",
    "aux_eval",
    "aux_poly",
    "bgf_residual",
    "build_aux",
    "lp_bound_via_aux",
    "peel_kernel",
    "psd_sample_check",
    "verify_minorant",
]

BASIS = "product: H_k * prod_{j>k} (1 - z/u_j)"
_STANDARD_MAX_M = 60
_MAX_M = 400
_RICHARDSON_LEVELS = 8
_RICHARDSON_ORDER = 5
_LEVEL_RATIO = 0.75
_EPS = {"standard": 2.0 ** -52, "extended": 2.0 ** -104}


class NodeCollisionError(DomainError, ZeroDivisionError):
    """The evaluation point coincides with an interpolation node."""


@dataclass(frozen=True, eq=False)
class AuxFunction:
    """Truncated auxiliary function.

    ``nodes`` holds u_1 >= ... >= u_M (each value twice), ``coeffs`` and
    ``coeffs_lo`` the double-double H_1..H_M, ``radii`` the node radii
    lambda_j/(pi r).
    """

    params: BoundParams
    M: int
    nodes: np.ndarray
    coeffs: np.ndarray
    coeffs_lo: np.ndarray
    radii: np.ndarray
    precision: str
    basis: str = BASIS

    @property
    def H(self):
        return self.coeffs + self.coeffs_lo

    @property
    def dd_coeffs(self):
        """(hi, lo) double-double parts of H_1..H_M."""
        return self.coeffs, self.coeffs_lo

    def growth_constants(self):
        """(c, C) with c j^2 <= |u_j| <= C j^2 over the stored nodes."""
        j = np.arange(1, self.M + 1, dtype=np.float64)
        ratio = -self.nodes / (j * j)
        return float(ratio.min()), float(ratio.max())


def build_aux(params, M, precision="extended"):
    """Hermite interpolant of exp(alpha z) at u_{2j-1} = u_{2j} = -(lambda_j/(pi r))^2."""
    if isinstance(M, bool) or int(M) != M or M < 2 or M > _MAX_M or M % 2:
        raise DomainError(f"M must be an even integer in [2, {_MAX_M}], got {M!r}")
    M = int(M)
    if precision not in _EPS:
        raise DomainError(f"precision must be 'standard' or 'extended', got {precision!r}")
    if precision == "standard" and M > _STANDARD_MAX_M:
        raise PrecisionError(f"M={M} needs extended precision (standard allowed up to M={_STANDARD_MAX_M})")
    table = bessel_zeros(params.nu, M // 2)
    radii = np.asarray(table.zeros) / (math.pi * params.r)
    nodes = np.repeat(-(radii * radii), 2)
    hi, lo = hermite_coeffs(nodes, params.alpha, precision == "extended")
    total = hi + lo
    scale = float(np.max(np.abs(total))) if total.size else 0.0
    bad = np.flatnonzero(total < -4.0 * M * _EPS[precision] * scale)
    if bad.size or not np.all(np.isfinite(total)):
        k = int(bad[0]) + 1 if bad.size else -1
        raise PrecisionError(
            f"coefficient H_{k} = {total[k - 1] if k > 0 else float('nan')!r} violates nonnegativity; "
            f"the divided-difference table lost all significant digits")
    for arr in (nodes, hi, lo, radii):
        arr.setflags(write=False)
    return AuxFunction(params, M, nodes, hi, lo, radii, precision)


def aux_poly(h, z):
    """(p_M(z), p_M'(z)) at real points z."""
    z = np.asarray(z, dtype=np.float64)
    val, der = horner_eval(h.coeffs, h.coeffs_lo, h.nodes, z.reshape(-1))
    if z.ndim == 0:
        return float(val[0]), float(der[0])
    return val.reshape(z.shape), der.reshape(z.shape)


def aux_eval(h, t):
    """p_M(-t^2), the truncated auxiliary function at radius t."""
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise DomainError("radius must be a nonnegative real")
    return aux_poly(h, -(t * t))[0]


@dataclass(frozen=True)
class MinorantReport:
    max_violation: float
    argmax: float


def verify_minorant(h, t_max, grid_points=2000):
    """Largest value of p_M(-t^2) - exp(-alpha t^2) on a uniform grid of [0, t_max]."""
    if isinstance(grid_points, bool) or int(grid_points) != grid_points or grid_points < 1000:
        raise DomainError(f"grid_points must be an integer >= 1000, got {grid_points!r}")
    t_max = float(t_max)
    if not (t_max > 0) or not math.isfinite(t_max):
        raise DomainError(f"t_max must be positive, got {t_max!r}")
    t = np.linspace(0.0, t_max, int(grid_points))
    diff = aux_eval(h, t) - np.exp(-h.params.alpha * t * t)
    i = int(np.argmax(diff))
    return MinorantReport(float(diff[i]), float(t[i]))


# ---------------------------------------------------------------------------
# LP bound from the auxiliary function

def _log_surface(n):
    """ln of the surface area of the unit sphere in R^n."""
    return math.log(n) + 0.5 * n * math.log(math.pi) - math.lgamma(0.5 * n + 1.0)


def _limit_coeffs(h):
    """H_k extrapolated to M -> infinity.

    H_{k,M} approaches its limit like a power series in the omitted node
    mass sum_{j > M/2} 1/lambda_j^2, used here as the extrapolation variable.
    Each H_k is extrapolated from the tables at M, 3M/4, 9M/16, ... that
    have at least 2k nodes; coefficients seen only at level M are kept.
    """
    levels = [h.M]
    while len(levels) < _RICHARDSON_LEVELS and int(levels[-1] * _LEVEL_RATIO) & ~1 >= 8:
        levels.append(int(levels[-1] * _LEVEL_RATIO) & ~1)
    tables = [h.H] + [build_aux(h.params, m, h.precision).H for m in levels[1:]]
    # Rayleigh: sum over all zeros of 1/lambda^2 is 1/(4(nu+1))
    inv2 = 1.0 / h.radii ** 2 / (math.pi * h.params.r) ** 2
    tail = [1.0 / (4.0 * (h.params.nu + 1.0)) - math.fsum(inv2[: m // 2].tolist()) for m in levels]
    out = h.H.copy()
    for k in range(h.M):
        use = [i for i, m in enumerate(levels) if m >= 2 * (k + 1)][:_RICHARDSON_ORDER + 1]
        if len(use) >= 2:
            xs = [tail[i] for i in reversed(use)]
            ys = [tables[i][k] for i in reversed(use)]
            out[k] = _richardson(xs, ys, len(use) - 1)
    return out


def _weierstrass_integral(params, coeffs, zeros_needed):
    """int_0^inf h(t) t^(n-1) dt for h(t) = B(x) sum_k H_k / prod_{j<=k} (1 - x^2/lambda_{ceil(j/2)}^2).

    x = pi r t and B(x) = (Gamma(nu+1) (2/x)^nu J_nu(x))^2, nu = n/2, so that the
    product over all doubled nodes is B.  Panels run between consecutive zeros.
    """
    n, nu = params.n, params.nu
    K = len(coeffs)
    lam = np.asarray(bessel_zeros(nu, max(zeros_needed, (K + 1) // 2)).zeros)
    gx, gw = np.polynomial.legendre.leggauss(20)
    edges = np.concatenate([[0.0], lam[:zeros_needed]])
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    x = (lo[:, None] + half[:, None] * (gx[None, :] + 1.0)).ravel()
    jv = bessel_j_pair(nu, x)[0]
    log_b = 2.0 * (math.lgamma(nu + 1.0) + nu * np.log(2.0 / x))
    b = np.exp(log_b) * jv * jv
    acc = np.zeros_like(x)
    ratio = np.ones_like(x)
    xx = x * x
    for k in range(K):
        ratio = ratio / (1.0 - xx / lam[k // 2] ** 2)
        acc += coeffs[k] * ratio
    vals = (b * acc * x ** (n - 1)).reshape(lo.size, -1)
    panel = half * (vals @ gw)
    return math.fsum(panel.tolist()) / (math.pi * params.r) ** n, panel


def lp_bound_via_aux(h, quadrature_tol=1e-6, main_tol=1e-14):
    """rho*h^(0) - h(0) for the auxiliary function, computed two ways.

    (a) summation formula: the weighted values of p_M at the first M/2 node
        radii plus, beyond them, the Gaussian values that h matches there.
    (b) direct radial quadrature of h written through the Bessel product,
        h = B(x) sum_k H_k / prod_{j<=k} (1 - x^2/lambda_j^2), with H_k
        extrapolated in M.  p_M itself is a polynomial and cannot be
        integrated over R^n; its truncated stand-ins carry an O(1/M) error.

    Returns route (a); |(a) - (b)| is reported as ``tail_bound`` and a gap
    above 100*quadrature_tol (relative) raises ConvergenceError.
    """
    quadrature_tol = float(quadrature_tol)
    if not (quadrature_tol > 0):
        raise DomainError("quadrature_tol must be positive")
    p = h.params
    n = p.n
    half = h.M // 2
    ref = main_lower_bound(p, tol=main_tol)
    count = max(ref.terms_used, half)
    table = bessel_zeros(p.nu, count)
    lam = np.asarray(table.zeros)
    log_w = (_log_prefactor(n, False)[0] + (n - 2) * np.log(lam)
             - 2.0 * np.log(np.abs(np.asarray(table.companion_values))))
    values = np.exp(-p.decay * lam * lam)
    values[:half] = aux_eval(h, h.radii[:half])
    route_a = math.fsum((np.exp(log_w) * values).tolist())

    coeffs = _limit_coeffs(h)
    zeros_needed = max(2000, 4 * len(coeffs))
    radial, panels = _weierstrass_integral(p, coeffs, zeros_needed)
    # panels decay like x^-4 with width ~pi, so the omitted tail is about panel * x / (3 pi)
    last = float(bessel_zeros(p.nu, zeros_needed).zeros[-1])
    tail = abs(float(panels[-1])) * last / (3.0 * math.pi)
    route_b = math.exp(math.log(p.rho) + _log_surface(n)) * radial - math.fsum(coeffs.tolist())
    gap = abs(route_a - route_b)
    if gap > 100.0 * quadrature_tol * abs(route_a):
        raise ConvergenceError(
            f"routes disagree for n={n}, alpha={p.alpha}, rho={p.rho}, M={h.M}: "
            f"summation {route_a!r} vs quadrature {route_b!r}")
    return _result(math.log(route_a), "lp_via_aux", p, terms_used=count, tail_bound=gap,
                   notes=(f"M={h.M}", f"quadrature route {route_b!r}"),
                   extras={"route_b": route_b, "quadrature_tail": tail})


# ---------------------------------------------------------------------------
# summation formula check with h*(x) = c0 J_{n/2}(pi r|x|)^2 / (pi r|x|)^n

def _bessel_sq_over_s(nu, count):
    """Partial integrals of J_nu(s)^2/s up to each of the first ``count`` zeros."""
    zeros = np.asarray(bessel_zeros(nu, count).zeros)
    x, w = np.polynomial.legendre.leggauss(30)
    edges = np.concatenate([[0.0], zeros])
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    s = lo[:, None] + half[:, None] * (x[None, :] + 1.0)
    j = bessel_j_pair(nu, s)[0]
    panel = half * ((j * j / s) @ w)
    partial = np.array([math.fsum(panel[: i + 1].tolist()) for i in range(count)])
    return zeros, partial


def _richardson(xs, ys, order):
    """Neville extrapolation to x = 0 of ys sampled at xs."""
    p = list(ys[-(order + 1):])
    xv = list(xs[-(order + 1):])
    for level in range(1, order + 1):
        for i in range(order, level - 1, -1):
            p[i] = (xv[i - level] * p[i] - xv[i] * p[i - 1]) / (xv[i - level] - xv[i])
    return p[order]


def bgf_residual(n, rho=1.0, count=640):
    """|vol(B_{r/2}) * integral of h* - 1| with h*(0) = 1 and h* zero at every lambda_m/(pi r).

    The radial integral reduces to int_0^inf J_{n/2}(s)^2/s ds; partial
    integrals up to the zeros are extrapolated in 1/lambda to remove the tail.
    """
    p = BoundParams(n, 1.0, rho)
    if p.n > 32:
        raise DomainError("bgf_residual supports n <= 32")
    nu = p.nu
    zeros, partial = _bessel_sq_over_s(nu, count)
    picks = [count // 16, count // 8, count // 4, count // 2, count]
    xs = [1.0 / zeros[k - 1] for k in picks]
    ys = [partial[k - 1] for k in picks]
    est = _richardson(xs, ys, 3)
    est2 = _richardson(xs[:-1], ys[:-1], 3)
    if abs(est - est2) > 1e-6 * abs(est):
        raise ConvergenceError(f"tail extrapolation unstable for n={n}: {est!r} vs {est2!r}")
    log_c0 = 2.0 * (nu * math.log(2.0) + math.lgamma(nu + 1.0))
    log_total = (log_ball_volume(p.n, 0.5 * p.r) + _log_surface(p.n) + log_c0
                 - p.n * math.log(math.pi * p.r) + math.log(est))
    return abs(math.expm1(log_total))


# ---------------------------------------------------------------------------
# positive-definiteness sampling

def _peel_zeros(nu, k):
    if k == 0:
        return np.empty(0)
    if nu < 0:
        # nu = -1/2: J_{-1/2}(x) = sqrt(2/(pi x)) cos x
        return (np.arange(1, k + 1) - 0.5) * math.pi
    return np.asarray(bessel_zeros(nu, k).zeros)


_SINGULAR_RADIUS = 1e-4


def peel_kernel(n, k, t):
    """J_nu(t) / (t^nu prod_{i<=k} (1 - t^2/lambda_i^2)), nu = n/2 - 1, lambda_i zeros of J_nu.

    Continuous at t = 0 and at each lambda_i.
    """
    nu = 0.5 * n - 1.0
    lam = _peel_zeros(nu, k)
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    out = np.empty_like(t)
    at0 = t == 0.0
    out[at0] = math.exp(-nu * math.log(2.0) - math.lgamma(nu + 1.0))
    tp = t[~at0]
    if tp.size:
        num = bessel_j_pair(nu, tp)[0]
        near = [np.abs(tp - li) < _SINGULAR_RADIUS for li in lam]
        for li, mask in zip(lam, near):
            if mask.any():
                # J(x)/(1 - x^2/l^2) = -l^2/(x+l) * J(x)/(x-l), with the Taylor step
                # J(x)/(x-l) ~ J'(l) + (x-l) J''(l)/2, J'(l) = J_{nu-1}(l), J''(l) = -J'(l)/l
                d1 = float(bessel_j_pair(nu, li)[1])
                dx = tp[mask] - li
                num[mask] = -li * li / (tp[mask] + li) * (d1 - 0.5 * dx * d1 / li)
        for li, mask in zip(lam, near):
            factor = np.where(mask, 1.0, 1.0 - (tp / li) ** 2)
            num = num / factor
        out[~at0] = num * np.exp(-nu * np.log(tp))
    return float(out[0]) if scalar else out


def psd_sample_check(n, k, num_points, num_trials, seed=0):
    """Smallest Gram-matrix eigenvalue of the peeled Bessel kernel at random points.

    Points are uniform in a cube of side 4*lambda_{k+1} in R^n.
    """
    if isinstance(n, bool) or int(n) != n or not 1 <= n <= 8:
        raise DomainError(f"n must be an integer in 1..8, got {n!r}")
    if isinstance(k, bool) or int(k) != k or not 0 <= k <= 10:
        raise DomainError(f"k must be an integer in 0..10, got {k!r}")
    if isinstance(num_points, bool) or int(num_points) != num_points or not 1 <= num_points <= 12:
        raise DomainError(f"num_points must be an integer in 1..12, got {num_points!r}")
    if isinstance(num_trials, bool) or int(num_trials) != num_trials or num_trials < 1:
        raise DomainError(f"num_trials must be a positive integer, got {num_trials!r}")
    n, k, num_points, num_trials = int(n), int(k), int(num_points), int(num_trials)
    nu = 0.5 * n - 1.0
    side = 4.0 * float(_peel_zeros(nu, k + 1)[-1])
    rng = np.random.default_rng(seed)
    worst = math.inf
    iu = np.triu_indices(num_points, 1)
    for _ in range(num_trials):
        pts = rng.uniform(0.0, side, size=(num_points, n))
        dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
        gram = np.empty((num_points, num_points))
        gram[np.diag_indices(num_points)] = peel_kernel(n, k, 0.0)
        if num_points > 1:
            vals = peel_kernel(n, k, dist[iu])
            gram[iu] = vals
            gram[(iu[1], iu[0])] = vals
        worst = min(worst, float(np.linalg.eigvalsh(gram)[0]))
    return worst


# ---------------------------------------------------------------------------
# partial-fraction identity

def alg_identity_residual(u0, z, node_seed=None, M=30):
    """|1/(z-u0) - sum_{k=0}^M 1/(z-u_k) prod_{j>k} (1-u0/u_j)/(1-z/u_j)|.

    Nodes are u_j = -j^2, or with ``node_seed`` u_j = -j^2 (1 + U_j/2) for
    uniform U_j in [0, 1).
    """
    if isinstance(M, bool) or int(M) != M or M < 0:
        raise DomainError(f"M must be a nonnegative integer, got {M!r}")
    M = int(M)
    u0 = complex(u0)
    z = complex(z)
    j = np.arange(1, M + 1, dtype=np.float64)
    if node_seed is None:
        nodes = -(j * j)
    else:
        rng = np.random.default_rng(node_seed)
        nodes = -(j * j) * (1.0 + 0.5 * rng.uniform(size=M))
    u = [u0] + [complex(v) for v in nodes]
    for k, uk in enumerate(u):
        if z == uk:
            raise NodeCollisionError(f"z coincides with node u_{k}")
    lhs = 1.0 / (z - u0)
    terms = []
    prod = 1.0 + 0.0j
    for k in range(M, -1, -1):
        terms.append(prod / (z - u[k]))
        if k >= 1:
            prod *= (1.0 - u0 / u[k]) / (1.0 - z / u[k])
    rhs = complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))
    return abs(lhs - rhs)
