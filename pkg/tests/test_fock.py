import math
from fractions import Fraction

import pytest
from scipy.special import exp1

from bergconc.fock import (fock_bound, fock_convergence_table, fock_limit_check,
                           scaled_disk_integral)


class TestBound:
    def test_trivial(self):
        assert fock_bound(0, 0) == 1
        assert fock_bound(5, 2) == Fraction(3, 5)

    def test_domain(self):
        with pytest.raises(ValueError):
            fock_bound(1, 2)


class TestLimitCheck:
    def test_equality_at_origin(self):
        res = fock_limit_check(0, 0)
        assert abs(res["margin"]) <= res["error"] + 1e-12

    def test_exponential_integral_case(self):
        res = fock_limit_check(1, 1)
        ref = math.e * exp1(1.0)  # independent oracle
        assert res["integral"].value == pytest.approx(ref, abs=1e-9)
        assert res["bound"] == 1
        assert res["margin"] < 0

    def test_spot_bound(self):
        res = fock_limit_check(5, 2)
        assert res["bound"] == Fraction(3, 5)
        assert res["margin"] < 0

    def test_larger_orders(self):
        for n, k in ((3, 7), (4, 12), (2, 20)):
            res = fock_limit_check(k, n)
            assert res["margin"] <= res["error"]


class TestConvergence:
    def test_closed_form_low_order(self):
        # n=0, k=0: the rescaled integral is R/(R-1)
        for r in (100.0, 1000.0):
            est = scaled_disk_integral(0, 0, r)
            assert est.value == pytest.approx(r / (r - 1), rel=1e-9)

    def test_second_moment_limit(self):
        out = fock_convergence_table(2, 0, [1e2, 1e3, 1e4])
        assert out["limit"].value == pytest.approx(2.0, rel=1e-9)
        assert out["gaps_strictly_shrinking"]

    def test_derivative_case(self):
        out = fock_convergence_table(2, 1, [1e2, 1e3, 1e4])
        assert out["gaps_strictly_shrinking"]

    def test_monotone_r_required(self):
        with pytest.raises(ValueError):
            fock_convergence_table(2, 1, [1e3, 1e2])
