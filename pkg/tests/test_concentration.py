import math
from fractions import Fraction

import numpy as np
import pytest

from bergconc.bergman import AnalyticPolynomial, SpaceParams, kernel_polynomial, monomial_norm
from bergconc.concentration import (LevelSetEngine, bound_report,
                                    concentration_profile, curvature_margin_scan,
                                    distribution_rho, hat_factor, level_density,
                                    ode_convexity_check, theta_bound, u_star)
from bergconc.errors import UnboundedError, ViolationError

ONE = AnalyticPolynomial([1.0])


def monomial(k, alpha):
    coeffs = [0.0] * k + [1.0 / float(monomial_norm(k, alpha)) ** 0.5]
    return AnalyticPolynomial(coeffs)


class TestLevelDensity:
    def test_constant_closed_form(self):
        params = SpaceParams(alpha=2.5, n=0)
        for r in (0.0, 0.3, 0.8):
            z = r * np.exp(1.1j)
            ref = (1 - r * r) ** 2.5 / math.pi
            assert level_density(ONE, params, z) == pytest.approx(ref, rel=1e-13)

    def test_vanishing_derivative(self):
        params = SpaceParams(alpha=2.0, n=2)
        f = AnalyticPolynomial([0.0, 1.0])  # degree < n
        assert level_density(f, params, 0.3) == 0.0

    def test_pointwise_ceiling(self):
        params = SpaceParams(alpha=2.0, n=1)
        f = AnalyticPolynomial([0.3, 1.0, -0.5j, 0.2])
        zs = 0.95 * np.exp(1j * np.linspace(0, 2 * math.pi, 64)) * \
            np.linspace(0.01, 1.0, 64)
        assert float(np.max(level_density(f, params, zs))) <= 1 / math.pi + 1e-12


class TestDistribution:
    def test_constant_closed_form(self):
        alpha = 2.5
        params = SpaceParams(alpha=alpha, n=0)
        for level in (0.2, 0.1, 0.01):
            est = distribution_rho(ONE, params, level)
            ref = math.pi * ((math.pi * level) ** (-1 / alpha) - 1.0)
            assert abs(est.value - ref) <= max(est.error, 1e-10)

    def test_above_supremum(self):
        params = SpaceParams(alpha=2.5, n=0)
        assert distribution_rho(ONE, params, 0.5).value == 0.0

    def test_unbounded(self):
        params = SpaceParams(alpha=2.5, n=0)
        with pytest.raises(UnboundedError):
            distribution_rho(ONE, params, 0.0)

    def test_radial_vs_general_path(self):
        # the same monomial routed through both code paths
        alpha = 2.0
        params = SpaceParams(alpha=alpha, n=0)
        f = monomial(2, alpha)
        for level in (0.05, 0.15, 0.25):
            radial = distribution_rho(f, params, level)
            general = distribution_rho(f, params, level, force_general=True)
            tol = radial.error + general.error + 1e-12
            assert abs(radial.value - general.value) <= tol


class TestInverse:
    def test_constant_closed_form(self):
        alpha = 2.5
        params = SpaceParams(alpha=alpha, n=0)
        for s in (0.5, 1.0, 5.0, 20.0):
            res = u_star(ONE, params, s)
            ref = (1 / math.pi) * (1 + s / math.pi) ** (-alpha)
            assert res.level == pytest.approx(ref, rel=1e-12)
            assert abs(res.rho - s) <= max(1e-10, res.rho_error)

    def test_small_s_approaches_supremum(self):
        params = SpaceParams(alpha=2.5, n=0)
        res = u_star(ONE, params, 1e-6)
        assert res.level == pytest.approx(1 / math.pi, rel=1e-5)

    def test_roundtrip(self):
        alpha = 2.0
        params = SpaceParams(alpha=alpha, n=1)
        eng = LevelSetEngine(monomial(1, alpha), params, "mu")
        for s in (0.5, 1.0, 5.0, 20.0):
            res = eng.level_for_measure(s)
            assert abs(res.rho - s) <= max(res.rho_error, 1e-9)


class TestProfiles:
    def test_equality_baseline(self):
        alpha = 2.5
        params = SpaceParams(alpha=alpha, n=0)
        s_grid = np.geomspace(0.1, 100, 20)
        prof = concentration_profile(ONE, params, s_grid, "mu", label="one")
        for smp in prof.samples:
            assert abs(smp.i_hat - smp.theta) <= 1e-8
        rep = bound_report(prof)
        assert rep.passed

    def test_monotone_and_bounded(self):
        params = SpaceParams(alpha=2.0, n=1)
        prof = concentration_profile(monomial(1, 2.0), params,
                                     np.geomspace(0.1, 80, 15), "mu")
        i_raw = [smp.i_raw for smp in prof.samples]
        assert all(b >= a - 1e-12 for a, b in zip(i_raw, i_raw[1:]))
        assert i_raw[-1] <= 1.0 + prof.samples[-1].error

    def test_nu_variant_equality_baseline(self):
        # at n=0 the nu and mu families coincide and the baseline is sharp
        alpha = 2.5
        params = SpaceParams(alpha=alpha, n=0)
        prof = concentration_profile(ONE, params, np.geomspace(0.5, 20, 8), "nu")
        for smp in prof.samples:
            assert abs(smp.i_hat - smp.theta) <= 1e-8

    def test_kernel_matches_baseline(self):
        # Mobius-shifted extremal: same profile as f = 1 through the 2-D path
        alpha = 2.0
        params = SpaceParams(alpha=alpha, n=0)
        fk = kernel_polynomial(0.3, alpha, tol=1e-12)
        s_grid = np.geomspace(0.2, 30, 8)
        prof = concentration_profile(fk, params, s_grid, "mu", label="kernel")
        for smp in prof.samples:
            assert abs(smp.i_hat - smp.theta) <= 1e-6

    def test_strictness_with_riemann_oracle(self):
        # brute-force 2-D Riemann cross-check of I_raw at three measures
        alpha = 2.0
        params = SpaceParams(alpha=alpha, n=1)
        f = monomial(1, alpha)
        eng = LevelSetEngine(f, params, "mu")
        rs = np.linspace(1e-4, 0.999, 2400)
        thetas = np.linspace(0, 2 * math.pi, 720, endpoint=False)
        z = rs[:, None] * np.exp(1j * thetas[None, :])
        u = eng.u_at(z)
        t = rs * rs
        hyp_w = 2 * math.pi / len(thetas) * rs * (1 - t) ** -2.0
        for s in (0.5, 2.0, 10.0):
            smp = eng.sample_at(s)
            mask = u > smp.level
            riemann = float(np.sum(u * mask * hyp_w[:, None]) * (rs[1] - rs[0]))
            assert riemann == pytest.approx(smp.i_raw, rel=5e-3)
        rep = bound_report(concentration_profile(
            f, params, np.geomspace(0.1, 50, 12), "mu"))
        assert rep.passed and rep.strict

    def test_zero_derivative_profile(self):
        params = SpaceParams(alpha=2.0, n=2)
        prof = concentration_profile(AnalyticPolynomial([0.0, 1.0]), params,
                                     [0.5, 1.0, 5.0], "mu")
        assert all(smp.i_hat == 0.0 for smp in prof.samples)
        rep = bound_report(prof)
        assert rep.passed

    def test_literal_quotient_reported(self):
        params = SpaceParams(alpha=2.0, n=1)
        prof = concentration_profile(monomial(1, 2.0), params, [1.0, 5.0], "mu")
        for smp in prof.samples:
            assert 0.0 < smp.i_literal < smp.i_hat


class TestOdeConvexity:
    def test_map_inverts_theta(self):
        params = SpaceParams(alpha=2.5, n=1)
        x = float(params.exponent("mu"))
        for s in (0.3, 2.0, 40.0):
            # the roundtrip loses digits to 1 - theta cancellation at large s
            t = theta_bound(params, s, "mu")
            back = -math.pi + math.pi * (1 - t) ** (1 / (1 - x))
            assert back == pytest.approx(s, rel=1e-8)

    def test_equality_case(self):
        params = SpaceParams(alpha=2.0, n=0)
        prof = concentration_profile(ONE, params, np.geomspace(0.1, 50, 14), "mu")
        out = ode_convexity_check(prof)
        assert out["min_ode_residual"] >= -1e-9
        assert out["min_second_difference"] >= -1e-12

    def test_strict_case(self):
        params = SpaceParams(alpha=2.0, n=1)
        prof = concentration_profile(monomial(1, 2.0), params,
                                     np.geomspace(0.1, 20, 12), "mu")
        out = ode_convexity_check(prof)
        assert out["min_ode_residual"] >= -1e-6
        assert out["min_second_difference"] >= -1e-6


class TestCurvature:
    def test_order_zero_vanishes(self):
        out = curvature_margin_scan(0, Fraction(2), points=50)
        assert out["min_polynomial_margin"] == 0
        assert out["margin_at_zero"] == 0

    def test_order_one_polynomial(self):
        # Ht(t) = 12t + 6t^2 at n=1, alpha=2; H(1/2) = (15/2) * 2^10
        out = curvature_margin_scan(1, Fraction(2))
        assert out["margin_at_zero"] == 0
        c = 2 * 1 + 2
        ht_half = Fraction(12, 2) + Fraction(6, 4)
        h_half = float(ht_half) * 2.0 ** (2 * c + 2)
        # confirm against the internal evaluation at t = 1/2
        from bergconc.concentration import _exact_polyval
        from bergconc.specfun import HypergeomParams, hypergeom_poly_coeffs
        p = hypergeom_poly_coeffs(HypergeomParams(1 - Fraction(2) - 1, -1, 1))
        assert _exact_polyval(p, Fraction(1, 2)) == 2  # P = 1 + 2t
        assert ht_half == Fraction(15, 2)
        assert h_half == 7680.0

    def test_spot_scan(self):
        out = curvature_margin_scan(3, Fraction(5, 2))
        assert out["min_polynomial_margin"] >= 0
        assert out["margin_at_zero"] == 0

    def test_min_location_reported(self):
        out = curvature_margin_scan(2, Fraction(7, 2), points=120)
        assert 0 <= out["argmin_t"] < 1
