import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bergconc.errors import RootFailureError
from bergconc.exact import pochhammer
from bergconc.specfun import HypergeomParams, hypergeom_terminating
from bergconc.symmetric import (ResidueData, b_weight_identity_checks, b_weights,
                                build_table, c_coefficient, c_coefficient_scan,
                                complete_homogeneous, d_bound,
                                elementary_symmetric, main_inequality_scan,
                                moment_bound_check, n3_recursion_check,
                                p_polynomial_coeffs, residue_cross_checks,
                                root_polynomial_coeffs, roots_and_residues,
                                vandermonde_identity_check)

ALPHAS = [Fraction(2), Fraction(5, 2), Fraction(3), Fraction(7, 2), Fraction(10)]


class TestCCoefficient:
    def test_order_zero_is_one(self):
        for k in (0, 3, 17):
            assert c_coefficient(k, 0, Fraction(5, 2)) == 1

    def test_spot_value(self):
        assert c_coefficient(1, 1, 2) == Fraction(1, 3)

    def test_scan_small(self):
        out = c_coefficient_scan(2, Fraction(5, 2), 200)
        assert out["final_gap"] > 0

    def test_gap_shrinks(self):
        gaps = [c_coefficient_scan(3, Fraction(3), k)["final_gap"]
                for k in (100, 1000)]
        assert gaps[1] < gaps[0]


class TestVietaData:
    def test_e_zero(self):
        assert elementary_symmetric(3, Fraction(7, 2), 0) == 1

    def test_bernoulli_root(self):
        alpha = Fraction(5, 2)
        assert elementary_symmetric(1, alpha, 1) == alpha / (alpha + 1)

    def test_n_two_values(self):
        assert elementary_symmetric(2, 2, 1) == Fraction(6, 5)
        assert elementary_symmetric(2, 2, 2) == Fraction(3, 10)

    def test_n_two_against_explicit_radicals(self):
        # roots (alpha+1 -+ sqrt(2(alpha+1)/(alpha+2)))/(alpha+3)
        alpha = 2.0
        rad = math.sqrt(2 * (alpha + 1) / (alpha + 2))
        t1 = (alpha + 1 - rad) / (alpha + 3)
        t2 = (alpha + 1 + rad) / (alpha + 3)
        assert t1 + t2 == pytest.approx(float(elementary_symmetric(2, 2, 1)), abs=1e-12)
        assert t1 * t2 == pytest.approx(float(elementary_symmetric(2, 2, 2)), abs=1e-12)

    def test_homogeneous_low_orders(self):
        alpha = Fraction(7, 2)
        assert complete_homogeneous(3, alpha, 0) == 1
        assert complete_homogeneous(3, alpha, 1) == elementary_symmetric(3, alpha, 1)

    def test_homogeneous_spot(self):
        assert complete_homogeneous(2, 2, 2) == Fraction(57, 50)
        e1, e2 = elementary_symmetric(2, 2, 1), elementary_symmetric(2, 2, 2)
        assert complete_homogeneous(2, 2, 2) == e1 * e1 - e2

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_homogeneous_against_brute_force(self, n):
        # oracle: enumerate the monomials t_1^{j_1}...t_n^{j_n} over the
        # numeric roots
        alpha = Fraction(5, 2)
        data = roots_and_residues(n, alpha)
        for l in range(0, 9):
            brute = sum(
                math.prod(t ** j for t, j in zip(data.roots, exps))
                for exps in itertools.product(range(l + 1), repeat=n)
                if sum(exps) == l
            )
            assert brute == pytest.approx(float(complete_homogeneous(n, alpha, l)),
                                          rel=1e-10)

    @given(
        n=st.integers(min_value=1, max_value=6),
        alpha=st.fractions(min_value=Fraction(11, 10), max_value=10, max_denominator=20),
        l_max=st.integers(min_value=1, max_value=12),
    )
    @settings(max_examples=40, deadline=None)
    def test_newton_identities_consistency(self, n, alpha, l_max):
        # power sums from e (Newton) and from h agree exactly
        table = build_table(n, alpha, l_max)
        e = list(table.e) + [Fraction(0)] * max(0, l_max - n)
        p_from_e = []
        for k in range(1, l_max + 1):
            acc = Fraction((-1) ** (k - 1) * k) * e[k] if k <= n else Fraction(0)
            for i in range(1, min(k - 1, n) + 1):
                acc += (-1) ** (i - 1) * e[i] * p_from_e[k - i - 1]
            p_from_e.append(acc)
        p_from_h = []
        for k in range(1, l_max + 1):
            acc = Fraction(k) * table.h[k]
            for i in range(1, k):
                acc -= p_from_h[i - 1] * table.h[k - i]
            p_from_h.append(acc)
        assert p_from_e == p_from_h


class TestDBound:
    def test_low_orders(self):
        alpha = Fraction(5, 2)
        assert d_bound(2, alpha, 0) == 1
        assert d_bound(2, alpha, 1) == elementary_symmetric(2, alpha, 1)

    def test_spot(self):
        assert d_bound(2, 2, 2) == Fraction(6, 5)
        assert d_bound(2, 2, 2) - complete_homogeneous(2, 2, 2) == Fraction(3, 50)


class TestMainScan:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_proven_range(self, n):
        out = main_inequality_scan(n, Fraction(5, 2), 60)
        assert out["verdict"] == "PROVEN_RANGE_PASS"
        assert out["equality_l"] == (0, 1)
        assert out["min_margin"] == 0

    def test_exploratory_range(self):
        out = main_inequality_scan(5, Fraction(2), 40)
        assert out["verdict"] == "EXPLORATORY"
        assert out["first_negative_l"] is None or out["min_margin"] < 0

    def test_bernoulli_case(self):
        # n=1 margins are alpha/(alpha+l) - (alpha/(alpha+1))^l exactly
        alpha = Fraction(3)
        table = build_table(1, alpha, 20)
        for l in range(21):
            assert table.h[l] == (alpha / (alpha + 1)) ** l
            assert table.d[l] == alpha / (alpha + l)

    def test_n3_recursion(self):
        for alpha in (Fraction(2), Fraction(7, 2)):
            assert n3_recursion_check(alpha, 50) >= 0


class TestVandermondeIdentity:
    def test_trivial(self):
        assert vandermonde_identity_check(0, Fraction(2), Fraction(5)) == 1

    def test_one_term(self):
        beta, l = Fraction(7, 3), Fraction(11, 2)
        assert vandermonde_identity_check(1, beta, l) == -(l + 1) / beta

    def test_large_exact(self):
        vandermonde_identity_check(25, Fraction(7, 3), Fraction(11, 2))

    def test_negative_rational_l(self):
        vandermonde_identity_check(12, Fraction(11, 4), Fraction(-3, 2))


class TestBWeights:
    def test_first_orders(self):
        assert b_weights(1, Fraction(5, 2)) == (Fraction(1),)
        alpha = Fraction(2)
        assert b_weights(2, alpha) == (-alpha, alpha + 1)

    def test_displayed_sum_spot(self):
        # n=2, alpha=2, k=3: -2/3 + 3/2 = 5/6 = (k+alpha)_1/(k-1)_2
        w = b_weights(2, Fraction(2))
        lhs = w[0] / Fraction(3) + w[1] / Fraction(2)
        assert lhs == Fraction(5, 6)

    def test_identities_exact(self):
        for n in (1, 2, 3, 4):
            for alpha in (Fraction(2), Fraction(5, 2)):
                b_weight_identity_checks(n, alpha, range(n, 25), range(0, 25))

    def test_weighted_sum_spot(self):
        # n=3, alpha=5/2, l=4 instance of the second displayed identity
        b_weight_identity_checks(3, Fraction(5, 2), [], [4])


class TestRootsAndResidues:
    def test_bernoulli_case(self):
        data = roots_and_residues(1, 2.0)
        assert data.roots[0] == pytest.approx(2 / 3, abs=1e-13)
        assert data.betas[0] == pytest.approx(2.0, abs=1e-12)
        assert data.residues[0] == pytest.approx(1.0, abs=1e-12)

    def test_explicit_pair(self):
        data = roots_and_residues(2, 2.0)
        rad = math.sqrt(1.5)
        assert data.roots[0] == pytest.approx((3 - rad) / 5, abs=1e-12)
        assert data.roots[1] == pytest.approx((3 + rad) / 5, abs=1e-12)

    def test_residues_sum_to_one(self):
        data = roots_and_residues(3, 3.5)
        assert float(np.sum(data.residues)) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_cross_checks(self, n):
        alpha = Fraction(5, 2)
        data = roots_and_residues(n, alpha)
        checks = residue_cross_checks(data, alpha, l_max=50)
        assert checks["residue_sum_err"] <= 1e-10
        assert checks["partial_fraction_err"] <= 1e-10
        assert checks["vieta_err"] <= 1e-10
        if n <= 3:
            assert checks["moment_identity_err"] <= 1e-9

    def test_root_polynomial_vs_terminating_form(self):
        # V(t) = (-1)^n n!/(alpha)_n F(-n, n+alpha; 1; 1-t) at sample points
        n, alpha = 3, Fraction(5, 2)
        coeffs = [float(c) for c in root_polynomial_coeffs(n, alpha)]
        scale = (-1) ** n * math.factorial(n) / float(pochhammer(alpha, n))
        for t in np.linspace(0.05, 0.95, 10):
            lhs = np.polynomial.polynomial.polyval(t, coeffs)
            rhs = scale * hypergeom_terminating(
                HypergeomParams(-n, n + float(alpha), 1), 1 - float(t))
            assert abs(lhs - rhs) <= 1e-11 * max(1.0, abs(lhs))

    def test_p_polynomial_has_positive_coeffs(self):
        for n in (1, 2, 5):
            assert all(c > 0 for c in p_polynomial_coeffs(n, Fraction(5, 2)))


class TestMomentBound:
    def test_spot_oracle(self):
        # n=1, alpha=2, k=1: the integral of (1-t)^2/(1+2t) over (0,1) has
        # the elementary antiderivative value (9/8)ln3 - 1, and the exact
        # bound is 1/3
        res = moment_bound_check(1, 1, Fraction(2))
        oracle = 9 / 8 * math.log(3) - 1
        assert abs(res["lhs"].value - oracle) <= 1e-10
        assert res["rhs"] == Fraction(1, 3)
        assert res["margin"] > 0

    def test_k_equals_n_prefactor(self):
        # at k=n the falling-factorial prefactor is n!^2
        res = moment_bound_check(3, 3, Fraction(5, 2))
        assert res["margin"] > 0

    def test_scan_positive(self):
        for k in range(2, 61):
            res = moment_bound_check(k, 2, Fraction(5, 2))
            assert res["margin"] > res["error"]
