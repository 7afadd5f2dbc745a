"""Weighted Bergman-space layer: norms, reproducing kernels, derivative
growth bounds, and the measures the concentration checks integrate against.

Convention
----------
Two parameter conventions are common for weighted Bergman spaces on the
unit disk: the raw weight (1-|z|^2)^a dA with kernel proportional to
(1 - z w̄)^{-a-2}, and the normalized probability weight

    dA_alpha = (alpha - 1)/pi * (1 - |z|^2)^{alpha - 2} dx dy,  alpha > 1,

with kernel K_w(z) = (1 - z w̄)^{-alpha} and monomial norms
m_k = ||z^k||^2 = k! Gamma(alpha) / Gamma(k + alpha).  This library uses
the normalized convention everywhere; the raw convention maps onto it via
a = alpha - 2.

Measures
--------
Three measures appear below (densities w.r.t. planar Lebesgue measure):

* the hyperbolic measure  (1-|z|^2)^{-2},
* the "mu" family   (alpha+2n-1)(1-|z|^2)^{alpha+2n} /
                    (pi n! (alpha)_n F(1-alpha-n, -n; 1; |z|^2)),
* the "nu" family   Gamma(alpha)(1-|z|^2)^{alpha+2n} /
                    (pi Gamma(alpha+2n-1)).

Disk points are plain complex numbers with |z| < 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import FormMismatchError, TruncationError, ViolationError
from .exact import Scalar, as_exact, gamma_ratio, pochhammer
from .specfun import HypergeomParams, hypergeom_series, hypergeom_terminating

MU = "mu"
NU = "nu"
VARIANTS = (MU, NU)


@dataclass(frozen=True)
class SpaceParams:
    """Weight parameter alpha (normalized convention, alpha > 1) and
    derivative order n >= 0."""

    alpha: Scalar
    n: int

    def __post_init__(self):
        if not self.alpha > 1:
            raise ValueError(f"alpha must be > 1 in the normalized convention, got {self.alpha}")
        if self.n < 0 or int(self.n) != self.n:
            raise ValueError(f"derivative order must be a nonnegative integer, got {self.n}")

    def exponent(self, variant: str = MU):
        """Decay exponent X of the sharp bound 1 - (1 + s/pi)^(1-X)."""
        if variant == MU:
            return (self.n + 1) * (self.n + self.alpha)
        if variant == NU:
            return 2 * self.n + self.alpha

        raise ValueError(f"unknown measure variant {variant!r}")

    @property
    def alpha_float(self) -> float:
        return float(self.alpha)


class AnalyticPolynomial:
    """f(z) = sum_k a_k z^k with complex float coefficients; immutable.

    Exactness lives in the rational coefficient layer of the inequality
    checks, not here: disk evaluations are plain complex128.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex)).copy()
        c.setflags(write=False)
        self.coeffs = c

    @property
    def degree(self) -> int:
        """Largest k with a_k != 0, or -1 for the zero polynomial."""
        nz = np.nonzero(self.coeffs)[0]
        return int(nz[-1]) if nz.size else -1

    def __call__(self, z):
        return npoly.polyval(z, self.coeffs)

    def derivative(self, n: int = 1) -> "AnalyticPolynomial":
        if n == 0:
            return self
        if n > self.degree:
            return AnalyticPolynomial([0.0])
        return AnalyticPolynomial(npoly.polyder(self.coeffs, m=n))

    def norm_sq(self, alpha: Scalar) -> float:
        return norm_sq(self, alpha)

    def normalized(self, alpha: Scalar) -> "AnalyticPolynomial":
        nrm = math.sqrt(self.norm_sq(alpha))
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero polynomial")
        return AnalyticPolynomial(self.coeffs / nrm)


def monomial_norm(k: int, alpha: Scalar) -> Fraction:
    """m_k = ||z^k||^2 = k! / (alpha)_k, exact."""
    if k < 0:
        raise ValueError("k must be >= 0")
    a = as_exact(alpha)
    return Fraction(math.factorial(k)) / pochhammer(a, k)


def norm_sq(f: AnalyticPolynomial, alpha: Scalar) -> float:
    """Parseval norm: sum_k |a_k|^2 m_k."""
    a = as_exact(alpha)
    return float(sum(
        abs(ak) ** 2 * float(monomial_norm(k, a))
        for k, ak in enumerate(f.coeffs) if ak != 0
    ))


def inner_product(f: AnalyticPolynomial, g: AnalyticPolynomial, alpha: Scalar) -> complex:
    """<f, g> = sum_k a_k conj(b_k) m_k."""
    a = as_exact(alpha)
    m = min(len(f.coeffs), len(g.coeffs))
    return complex(sum(
        f.coeffs[k] * np.conj(g.coeffs[k]) * float(monomial_norm(k, a))
        for k in range(m)
    ))


def derivative_coeffs(f: AnalyticPolynomial, n: int) -> AnalyticPolynomial:
    """Coefficients of f^{(n)}: b_{k-n} = k(k-1)...(k-n+1) a_k."""
    return f.derivative(n)


def eval_kernel(w: complex, z: complex, alpha: Scalar) -> complex:
    """Reproducing kernel K_w(z) = (1 - z conj(w))^{-alpha}, principal branch."""
    return (1.0 - z * np.conj(w)) ** (-float(alpha))


def kernel_polynomial(w: complex, alpha: Scalar, tol: float = 1e-12,
                      max_degree: int = 4000) -> AnalyticPolynomial:
    """Truncated Taylor expansion of K_w with norm tail bound <= tol.

    Coefficients are a_k = (alpha)_k / k! * conj(w)^k; the dropped tail has
    squared norm sum_{k>K} (alpha)_k/k! |w|^{2k}, bounded by a geometric
    majorant with ratio |w|^2 (alpha+K+1)/(K+2).

    Raises TruncationError when the bound is unreachable at max_degree.
    """
    a = float(alpha)
    ww = abs(w) ** 2
    if ww >= 1.0:
        raise ValueError("kernel center must lie in the open disk")
    coeffs = [1.0 + 0.0j]
    tail_term = 1.0  # (alpha)_k / k! * |w|^(2k) at current k
    wc = np.conj(w)
    ck = 1.0 + 0.0j
    for k in range(max_degree):
        ck = ck * (a + k) / (k + 1.0) * wc
        coeffs.append(ck)
        tail_term *= (a + k) / (k + 1.0) * ww
        ratio = ww * (a + k + 2.0) / (k + 3.0)
        if ratio < 1.0:
            tail = tail_term * ratio / (1.0 - ratio)
            if tail <= tol:
                return AnalyticPolynomial(coeffs)
    raise TruncationError(
        f"kernel tail bound {tol:.1e} unreachable at degree {max_degree}"
    )


def growth_profile(n: int, alpha: Scalar, r: float, rel_tol: float = 1e-10) -> float:
    """Sharp growth envelope g(r) with |f^{(n)}(z)|^2 <= g(|z|) ||f||^2.

    Evaluates both algebraic forms,

        g = n! (alpha)_n (1-r^2)^{-alpha-2n} F(1-alpha-n, -n; 1; r^2)
          = n! (alpha)_n F(n+1, n+alpha; 1; r^2),

    and returns their common value.  A disagreement beyond rel_tol raises
    FormMismatchError and always indicates an implementation bug.
    """
    if not (0.0 <= r < 1.0):
        raise ValueError("r must lie in [0, 1)")
    a = float(alpha)
    t = r * r
    lead = float(pochhammer(a, n)) * math.factorial(n)
    p_val = hypergeom_terminating(HypergeomParams(1 - a - n, -n, 1), t)
    form1 = lead * (1.0 - t) ** (-a - 2 * n) * p_val
    series = hypergeom_series(HypergeomParams(n + 1, n + a, 1), t,
                              tol=max(1e-280, 1e-14 * form1 / lead))
    form2 = lead * series.value
    if abs(form1 - form2) > rel_tol * abs(form1):
        raise FormMismatchError(
            f"growth envelope forms disagree at n={n}, alpha={alpha}, r={r}: "
            f"{form1!r} vs {form2!r}"
        )
    return form1


def density_hyperbolic(z: complex) -> float:
    """Hyperbolic density (1-|z|^2)^{-2} w.r.t. planar Lebesgue measure."""
    t = abs(z) ** 2
    _require_disk(t)
    return (1.0 - t) ** (-2.0)


def density_mu(params: SpaceParams, z: complex) -> float:
    """Density of the mu-family measure at z."""
    t = abs(z) ** 2
    _require_disk(t)
    a, n = params.alpha_float, params.n
    p_val = hypergeom_terminating(HypergeomParams(1 - a - n, -n, 1), t)
    lead = math.factorial(n) * float(pochhammer(as_exact(params.alpha), n))
    return (a + 2 * n - 1) * (1.0 - t) ** (a + 2 * n) / (math.pi * lead * p_val)


def density_nu(params: SpaceParams, z: complex) -> float:
    """Density of the nu-family measure at z."""
    t = abs(z) ** 2
    _require_disk(t)
    a, n = params.alpha_float, params.n
    lead = float(gamma_ratio(as_exact(params.alpha), 2 * n - 1))
    return (1.0 - t) ** (a + 2 * n) / (math.pi * lead)


def _require_disk(t: float):
    if t >= 1.0:
        raise ValueError("point must lie in the open unit disk")


def hyperbolic_disc_area(r: float) -> float:
    """Hyperbolic area of the centered disc of Euclidean radius r: pi r^2/(1-r^2)."""
    if not (0.0 <= r < 1.0):
        raise ValueError("r must lie in [0, 1)")
    return math.pi * r * r / (1.0 - r * r)


def radius_for_area(s: float) -> float:
    """Euclidean radius of the centered disc of hyperbolic area s."""
    if s < 0:
        raise ValueError("area must be >= 0")
    return math.sqrt(s / (s + math.pi))


def hyperbolic_circle_length(r: float) -> float:
    """Hyperbolic length of the centered circle of Euclidean radius r: 2 pi r/(1-r^2)."""
    if not (0.0 <= r < 1.0):
        raise ValueError("r must lie in [0, 1)")
    return 2.0 * math.pi * r / (1.0 - r * r)


def isoperimetric_residual(r: float) -> tuple[float, Fraction]:
    """L^2 - (4 pi s + 4 s^2) for the centered circle of radius r.

    Returns the plain float residual and the exact residual obtained by
    treating the binary values of r and pi as exact rationals (the circle
    equality is an algebraic identity in both, so the exact residual is 0
    whenever the implementation is correct).
    """
    length = hyperbolic_circle_length(r)
    s = hyperbolic_disc_area(r)
    float_residual = length * length - 4.0 * math.pi * s - 4.0 * s * s
    re, pie = as_exact(r), as_exact(math.pi)
    se = pie * re * re / (1 - re * re)
    le = 2 * pie * re / (1 - re * re)
    exact_residual = le * le - 4 * pie * se - 4 * se * se
    return float_residual, exact_residual


def pointwise_bound_check(f: AnalyticPolynomial, n: int, alpha: Scalar,
                          z: complex, tol: float = 1e-9) -> float:
    """Margin g(|z|) ||f||^2 - |f^{(n)}(z)|^2 of the pointwise bound, >= 0.

    Raises ViolationError when the margin is below -tol * scale, which
    would indicate a convention or implementation bug.
    """
    t = abs(z) ** 2
    _require_disk(t)
    g = growth_profile(n, alpha, abs(z))
    bound = g * norm_sq(f, alpha)
    value = abs(f.derivative(n)(z)) ** 2
    margin = bound - value
    if margin < -tol * max(bound, 1.0):
        raise ViolationError(
            f"pointwise derivative bound violated at z={z}: margin={margin!r}"
        )
    return margin
