"""Independent high-precision references built on mpmath only."""
import mpmath


def main_bound_mp(n, alpha, rho, count=40, dps=30):
    """Series sum over the first ``count`` zeros of J_{n/2}, all in mpmath."""
    with mpmath.workdps(dps):
        nu = mpmath.mpf(n) / 2
        # vol(B_{r/2}) = rho
        half_r = (rho * mpmath.gamma(nu + 1) / mpmath.pi ** nu) ** (1 / mpmath.mpf(n))
        r = 2 * half_r
        a = mpmath.mpf(alpha) / (mpmath.pi * r) ** 2
        pre = n / (2 ** (n - 1) * mpmath.gamma(nu + 1) ** 2)
        total = mpmath.mpf(0)
        for m in range(1, count + 1):
            lam = mpmath.besseljzero(nu, m)
            total += pre * lam ** (n - 2) / mpmath.besselj(nu - 1, lam) ** 2 * mpmath.exp(-a * lam ** 2)
        return total
