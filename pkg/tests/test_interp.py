import math

import numpy as np
import pytest

from gcmbounds import interp
from gcmbounds.bounds import BoundParams, main_lower_bound
from gcmbounds.errors import ConvergenceError, DomainError, PrecisionError
from gcmbounds.interp import (
    NodeCollisionError,
    alg_identity_residual,
    aux_eval,
    aux_poly,
    bgf_residual,
    build_aux,
    lp_bound_via_aux,
    peel_kernel,
    psd_sample_check,
    verify_minorant,
)
from gcmbounds.specfun import bessel_zeros

PI = math.pi


@pytest.fixture(scope="module")
def aux200():
    return build_aux(BoundParams(2, PI, 1.0), 200)


class TestBuild:
    def test_two_nodes_is_tangent_line(self, backend):
        p = BoundParams(3, 1.3, 0.7)
        h = build_aux(p, 2)
        u1 = h.nodes[0]
        f = math.exp(p.alpha * u1)
        for z in (-5.0, -1.0, 0.0, 0.4):
            val, der = aux_poly(h, z)
            assert val == pytest.approx(f + p.alpha * f * (z - u1), rel=1e-14, abs=1e-300)
            assert der == pytest.approx(p.alpha * f, rel=1e-14)

    @pytest.mark.parametrize("n,alpha,rho,M", [(2, PI, 1.0, 40), (1, PI / 2, 2.0, 60), (5, 2 * PI, 0.5, 120),
                                               (8, PI, 1.0, 200), (3, 0.7, 1.0, 400)])
    def test_node_residuals_and_signs(self, backend, n, alpha, rho, M):
        h = build_aux(BoundParams(n, alpha, rho), M)
        u = h.nodes[::2]
        f = np.exp(alpha * u)
        keep = f > 1e-290
        val, der = aux_poly(h, u[keep])
        assert np.all(np.abs(val - f[keep]) <= 1e-10 * f[keep])
        assert np.all(np.abs(der - alpha * f[keep]) <= 1e-10 * alpha * f[keep])
        H = h.H
        assert np.all(H >= -np.finfo(float).eps * np.max(np.abs(H)))

    def test_product_basis_floor_m40(self):
        h = build_aux(BoundParams(2, PI, 1.0), 40)
        assert float(h.H.min()) >= -1e-20

    def test_node_growth(self):
        h = build_aux(BoundParams(4, PI, 1.0), 200)
        c, C = h.growth_constants()
        assert 0 < c <= C < 20 * c
        j = np.arange(1, 201)
        assert np.all(c * j * j <= -h.nodes + 1e-12) and np.all(-h.nodes <= C * j * j + 1e-12)

    def test_standard_matches_extended(self):
        p = BoundParams(2, PI, 1.0)
        a = build_aux(p, 40, "standard").H
        b = build_aux(p, 40, "extended").H
        big = b > 1e-12 * b.max()
        assert np.allclose(a[big], b[big], rtol=1e-6)

    def test_precision_limits(self):
        p = BoundParams(2, PI, 1.0)
        with pytest.raises(PrecisionError):
            build_aux(p, 62, "standard")
        for bad in (0, 3, 402, 2.5, True):
            with pytest.raises(DomainError):
                build_aux(p, bad)
        with pytest.raises(DomainError):
            build_aux(p, 10, "quad")

    def test_arrays_read_only(self, aux200):
        with pytest.raises(ValueError):
            aux200.coeffs[0] = 1.0


class TestAuxFunction:
    def test_interpolation_at_radii(self, aux200):
        t = aux200.radii
        f = np.exp(-PI * t * t)
        keep = f > 1e-290
        assert np.allclose(aux_eval(aux200, t[keep]), f[keep], rtol=1e-10, atol=0)

    def test_value_at_zero_regression(self, aux200):
        h40 = build_aux(BoundParams(2, PI, 1.0), 40)
        v40 = float(aux_eval(h40, 0.0))
        v200 = float(aux_eval(aux200, 0.0))
        assert v200 <= 1 and v40 <= 1
        assert v200 == pytest.approx(0.4120258580149343, rel=1e-9)
        assert abs(v200 - 0.4120258580149343) < abs(v40 - 0.4120258580149343)

    def test_minorant_scan(self, aux200):
        rep = verify_minorant(aux200, 0.9 * aux200.radii[-1], 2000)
        assert rep.max_violation <= 1e-8
        assert 0 <= rep.argmax <= 0.9 * aux200.radii[-1]

    def test_midpoints_strictly_below(self):
        h = build_aux(BoundParams(2, PI, 1.0), 60)
        r = h.radii
        mid = 0.5 * (r[:-1] + r[1:])
        f = np.exp(-PI * mid * mid)
        keep = f > 1e-250
        assert np.all(aux_eval(h, mid[keep]) < f[keep])
        assert aux_eval(h, 0.0) < 1.0

    def test_scan_domain(self, aux200):
        with pytest.raises(DomainError):
            verify_minorant(aux200, 1.0, 10)
        with pytest.raises(DomainError):
            verify_minorant(aux200, -1.0)
        with pytest.raises(DomainError):
            aux_eval(aux200, -0.5)


class TestLPBound:
    def test_table_rows(self):
        for n, ref in ((1, 0.08643481), (2, 0.15702654)):
            v = lp_bound_via_aux(build_aux(BoundParams(n, PI, 1.0), 200)).value
            assert abs(v - ref) <= 1e-6

    def test_routes_and_reporting(self, aux200):
        res = lp_bound_via_aux(aux200)
        ref = main_lower_bound(aux200.params, tol=1e-14).value
        assert res.value == pytest.approx(ref, rel=1e-12)
        assert res.tail_bound <= 1e-4 * res.value
        assert res.extras["route_b"] == pytest.approx(ref, rel=1e-4)
        assert res.notes[0] == "M=200"

    def test_small_m_flags_quadrature_gap(self):
        p = BoundParams(1, PI / 2, 2.0)
        with pytest.raises(ConvergenceError):
            lp_bound_via_aux(build_aux(p, 40))
        res = lp_bound_via_aux(build_aux(p, 40), quadrature_tol=1.0)
        assert res.tail_bound > 1e-2 * res.value

    @pytest.mark.slow
    def test_quadrature_route_converges_in_m(self):
        p = BoundParams(2, PI, 1.0)
        ref = main_lower_bound(p, tol=1e-14).value
        gaps = [abs(lp_bound_via_aux(build_aux(p, M), quadrature_tol=1e-2).extras["route_b"] - ref)
                for M in (100, 200, 400)]
        assert gaps[0] > gaps[1] > gaps[2]

    @pytest.mark.slow
    @pytest.mark.parametrize("n", range(1, 9))
    def test_oracle_equivalence_all_dimensions(self, n):
        for alpha in (PI / 2, PI, 2 * PI):
            for rho in (0.5, 1.0, 2.0):
                p = BoundParams(n, alpha, rho)
                res = lp_bound_via_aux(build_aux(p, 200))
                ref = main_lower_bound(p, tol=1e-14).value
                assert abs(res.value - ref) <= 1e-6 * ref
                assert abs(res.extras["route_b"] - ref) <= 1e-4 * ref


class TestBGF:
    @pytest.mark.parametrize("n,limit", [(1, 1e-8), (2, 1e-7), (8, 1e-6)])
    def test_quoted_limits(self, n, limit):
        assert bgf_residual(n, 1.0) <= limit

    @pytest.mark.parametrize("n", range(1, 9))
    def test_all_small_dimensions(self, n):
        assert bgf_residual(n, 1.0) <= 1e-6
        assert bgf_residual(n, 2.5) <= 1e-6

    def test_one_dimension_closed_form(self):
        assert bgf_residual(1, 1.0) <= 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            bgf_residual(40)


class TestPSD:
    def test_single_point(self):
        for n in range(1, 9):
            nu = n / 2 - 1
            assert psd_sample_check(n, 2, 1, 3) == pytest.approx(1 / (2 ** nu * math.gamma(nu + 1)), rel=1e-14)

    @pytest.mark.parametrize("n,k", [(3, 0), (2, 3)])
    def test_quoted_cases(self, n, k):
        scale = peel_kernel(n, k, 0.0)
        assert psd_sample_check(n, k, 8, 200, seed=11) >= -1e-9 * scale

    def test_kernel_continuous_at_zeros(self):
        for n, k in ((2, 3), (5, 4), (1, 3)):
            nu = n / 2 - 1
            lam = interp._peel_zeros(nu, k)
            for li in lam:
                left = peel_kernel(n, k, li - 2e-4)
                inside = peel_kernel(n, k, np.array([li - 5e-5, li, li + 5e-5]))
                right = peel_kernel(n, k, li + 2e-4)
                assert np.all(np.abs(inside - left) <= 1e-3 * abs(left) + 1e-12)
                assert abs(right - left) <= 1e-3 * abs(left) + 1e-12

    def test_one_dimension_zeros(self):
        assert np.allclose(interp._peel_zeros(-0.5, 3), [PI / 2, 3 * PI / 2, 5 * PI / 2])
        assert np.allclose(interp._peel_zeros(0.5, 2), bessel_zeros(0.5, 2).zeros)

    @pytest.mark.parametrize("args", [(0, 1, 4, 1), (9, 1, 4, 1), (2, -1, 4, 1), (2, 11, 4, 1),
                                      (2, 1, 0, 1), (2, 1, 13, 1), (2, 1, 4, 0)])
    def test_domain(self, args):
        with pytest.raises(DomainError):
            psd_sample_check(*args)


class TestPartialFractions:
    def test_empty_sum(self):
        assert alg_identity_residual(-0.5, 1 + 1j, M=0) == 0.0

    def test_quoted_case(self):
        assert alg_identity_residual(-0.5, 1 + 1j, None, 30) <= 1e-12

    @pytest.mark.parametrize("seed", range(5))
    def test_random_nodes(self, seed):
        assert alg_identity_residual(-0.3, 0.7 - 2j, seed, 40) <= 1e-12

    def test_collision(self):
        with pytest.raises(NodeCollisionError):
            alg_identity_residual(-0.5, -25.0)
        with pytest.raises(ZeroDivisionError):
            alg_identity_residual(-0.5, -0.5)
