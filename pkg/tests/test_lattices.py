import itertools
import math
import os

import numpy as np
import pytest

from gcmbounds import lattices
from gcmbounds.bounds import BoundParams, expectation_bound, main_lower_bound
from gcmbounds.errors import DomainError
from gcmbounds.lattices import (
    A2,
    D4,
    E8,
    Leech,
    Zn,
    lattice_energy,
    lattice_model,
    ramanujan_tau,
    sigma,
    theta_coefficients,
)

PI = math.pi


def _naive_tau(m_max):
    # q prod (1 - q^m)^24 by repeated multiplication of (1 - q^m)
    poly = [0] * (m_max + 1)
    poly[1] = 1
    for m in range(1, m_max + 1):
        for _ in range(24):
            for i in range(m_max, m - 1, -1):
                poly[i] -= poly[i - m]
    return poly[1:]


def _e8_counts(max_norm):
    # D8 plus D8 + (1/2)^8, counted by dynamic programming over coordinates
    counts = [0] * (max_norm + 1)
    bound = int(math.isqrt(max_norm)) + 1
    dp = {(0, 0): 1}
    for _ in range(8):
        nxt = {}
        for (norm, parity), c in dp.items():
            for x in range(-bound, bound + 1):
                nn = norm + x * x
                if nn <= max_norm:
                    key = (nn, (parity + x) % 2)
                    nxt[key] = nxt.get(key, 0) + c
        dp = nxt
    for (norm, parity), c in dp.items():
        if parity == 0:
            counts[norm] += c
    # half-integer coordinates: squared norm 4 * norm' with odd entries y = 2x
    dp = {(0, 0): 1}
    odd = [y for y in range(-2 * bound - 1, 2 * bound + 2) if y % 2]
    for _ in range(8):
        nxt = {}
        for (q, s), c in dp.items():
            for y in odd:
                qq = q + y * y
                if qq <= 4 * max_norm:
                    key = (qq, (s + y) % 4)
                    nxt[key] = nxt.get(key, 0) + c
        dp = nxt
    for (q, s), c in dp.items():
        if s == 0 and q % 4 == 0:
            counts[q // 4] += c
    return counts


class TestCoefficients:
    def test_tau_small(self):
        assert ramanujan_tau(3) == [1, -24, 252]

    def test_tau_against_naive(self):
        assert ramanujan_tau(40) == _naive_tau(40)

    def test_tau_domain(self):
        for bad in (0, 65, 2.5, True):
            with pytest.raises(DomainError):
                ramanujan_tau(bad)

    def test_sigma(self):
        assert sigma(3, 1) == 1
        assert sigma(1, 12) == 28
        assert sigma(11, 2) == 2049

    def test_e8_formula_matches_enumeration(self):
        enum = _e8_counts(10)
        for norm, count in theta_coefficients(E8(), 10):
            assert count == enum[norm] == 240 * sigma(3, norm // 2)

    def test_leech_first_shells(self):
        rows = dict(theta_coefficients(Leech(), 60))
        assert rows[2] == 0
        assert rows[4] == 196560
        assert rows[6] == 16773120
        for m in range(1, 31):
            assert rows[2 * m] * 691 == 65520 * (sigma(11, m) - _naive_tau(30)[m - 1])

    def test_d4_a2_against_divisor_formulas(self):
        d4 = dict(theta_coefficients(D4(), 40))
        for m in range(1, 21):
            odd = m
            while odd % 2 == 0:
                odd //= 2
            assert d4[2 * m] == 24 * sigma(1, odd)
        a2 = dict(theta_coefficients(A2(), 60))
        assert a2[2] == 6
        for m in range(1, 31):
            d1 = sum(1 for d in range(1, m + 1) if m % d == 0 and d % 3 == 1)
            d2 = sum(1 for d in range(1, m + 1) if m % d == 0 and d % 3 == 2)
            assert a2[2 * m] == 6 * (d1 - d2)

    def test_zn_counts(self):
        rows = dict(theta_coefficients(Zn(3), 12))
        brute = {}
        for v in itertools.product(range(-4, 5), repeat=3):
            q = sum(x * x for x in v)
            if 0 < q <= 12:
                brute[q] = brute.get(q, 0) + 1
        assert all(rows[k] == brute.get(k, 0) for k in range(1, 13))

    def test_counts_nonnegative(self):
        for model in (Zn(5), A2(), D4(), E8(), Leech()):
            assert all(c >= 0 and isinstance(c, int) for _, c in theta_coefficients(model, 40))

    def test_domain(self):
        with pytest.raises(DomainError):
            theta_coefficients(Leech(), 2)
        with pytest.raises(DomainError):
            theta_coefficients(E8(), 2.5)
        with pytest.raises(DomainError):
            lattice_model("B7")
        with pytest.raises(DomainError):
            Zn(0)

    def test_names(self):
        assert lattice_model("leech") == Leech()
        assert lattice_model("Z7").dim == 7
        assert lattice_model("e8").name == "E8"


class TestCache:
    def test_round_trip(self, tmp_path):
        first = theta_coefficients(E8(), 40, cache_dir=str(tmp_path))
        path = tmp_path / "theta_E8.txt"
        assert path.exists()
        again = theta_coefficients(E8(), 20, cache_dir=str(tmp_path))
        assert again == [r for r in first if r[0] <= 20]
        assert theta_coefficients(E8(), 40) == first

    def test_corrupt_or_short_file_regenerated(self, tmp_path):
        path = tmp_path / "theta_Leech.txt"
        path.write_text("2 0\n4 oops\n")
        rows = theta_coefficients(Leech(), 10, cache_dir=str(tmp_path))
        assert dict(rows)[4] == 196560
        path.write_text("2 0\n")
        assert theta_coefficients(Leech(), 10, cache_dir=str(tmp_path)) == rows
        assert not [f for f in os.listdir(tmp_path) if f.startswith(".theta_")]

    def test_energy_with_cache(self, tmp_path):
        a = lattice_energy(Leech(), PI, 1.0, cache_dir=str(tmp_path)).value
        assert a == lattice_energy(Leech(), PI, 1.0).value


class TestEnergy:
    def test_z1_is_theta(self):
        for alpha in (0.5, PI, 7.0):
            ref = 2 * math.fsum(math.exp(-alpha * m * m) for m in range(1, 200))
            assert lattice_energy(Zn(1), alpha, 1.0).value == pytest.approx(ref, rel=1e-13)

    def test_zn_is_power_of_theta(self):
        t = 1 + 2 * math.fsum(math.exp(-2.0 * m * m) for m in range(1, 100))
        assert lattice_energy(Zn(6), 2.0, 1.0).value == pytest.approx(t ** 6 - 1, rel=1e-13)

    def test_a2_direct_sum(self):
        s2 = math.sqrt(3) / 2  # density-one scale: covolume sqrt(3)/2 per unit Gram
        total = []
        for i in range(-30, 31):
            for j in range(-30, 31):
                if i or j:
                    total.append(math.exp(-PI * (i * i + i * j + j * j) / s2))
        assert lattice_energy(A2(), PI, 1.0).value == pytest.approx(math.fsum(total), rel=1e-13)

    def test_scaling_consistency(self):
        for model in (A2(), D4(), E8(), Leech()):
            rho = 1.7
            s2 = (rho * model.det_covolume) ** (2 / model.dim)
            a = lattice_energy(model, PI, rho).value
            # at density one the scale is covolume^(2/n), so alpha absorbs the ratio
            b = lattice_energy(model, PI * model.det_covolume ** (2 / model.dim) / s2, 1.0).value
            assert a == pytest.approx(b, rel=1e-13)

    @pytest.mark.parametrize("name,n", [("Z1", 1), ("A2", 2), ("Z3", 3), ("D4", 4), ("E8", 8), ("Leech", 24)])
    @pytest.mark.parametrize("alpha", [0.5, PI / 2, PI, 2 * PI, 10.0])
    @pytest.mark.parametrize("rho", [0.5, 1.0, 2.0])
    def test_energy_above_bound(self, name, n, alpha, rho):
        e = lattice_energy(lattice_model(name), alpha, rho)
        lb = main_lower_bound(BoundParams(n, alpha, rho)).value
        assert e.value >= lb * (1 - 1e-10)
        assert e.tail_bound <= 1e-12 * e.value

    def test_records_beat_the_mean(self):
        for model in (E8(), Leech()):
            e = lattice_energy(model, PI, 1.0).value
            assert e < expectation_bound(BoundParams(model.dim, PI, 1.0)).value

    def test_tolerance_domain(self):
        with pytest.raises(DomainError):
            lattice_energy(E8(), PI, 1.0, tol=1e-6)
        with pytest.raises(DomainError):
            lattice_energy(E8(), -1.0, 1.0)

    def test_tail_majorant_is_rigorous(self):
        # compare the packing bound with the exact E8 tail beyond norm 10
        model = E8()
        a = PI
        rows = theta_coefficients(model, 200)
        exact = math.fsum(c * math.exp(-a * k) for k, c in rows if k > 10)
        assert math.exp(lattices._log_tail_majorant(model, a, 10)) >= exact
