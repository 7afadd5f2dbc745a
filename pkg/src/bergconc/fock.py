"""Gaussian-weight (Fock-space) limit of the disk inequalities.

Rescaling the k-th moment inequality of the mu-family reduction by
y = alpha * t and sending alpha -> infinity turns the terminating
hypergeometric denominator into the Laguerre value L_n(-y) and yields

    integral_0^inf y^{k-n} e^{-y} / L_n(-y) dy <= n! ((k-n)!)^2 / k!,

with equality exactly at n = k = 0.  This module checks the limiting
inequality numerically against the exact rational bound and tabulates the
rescaled disk integrals along increasing weight parameters to exhibit the
convergence.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy.integrate import quad

from .errors import ViolationError
from .exact import as_exact
from .quadrature import Estimate, integrate_halfline_exp
from .specfun import HypergeomParams, hypergeom_poly_coeffs, laguerre_eval


def fock_bound(k: int, n: int) -> Fraction:
    """Exact right-hand side n! ((k-n)!)^2 / k!."""
    if not k >= n >= 0:
        raise ValueError("need k >= n >= 0")
    return Fraction(math.factorial(n) * math.factorial(k - n) ** 2, math.factorial(k))


def fock_limit_check(k: int, n: int, tol: float = 1e-10) -> dict:
    """Numeric integral vs. the exact bound; margin integral - bound <= 0.

    Raises ViolationError when the margin exceeds the quadrature error bar.
    """
    bound = fock_bound(k, n)
    integral = integrate_halfline_exp(
        lambda y: y ** (k - n) / laguerre_eval(n, y), tol=tol * max(1.0, float(bound)))
    margin = integral.value - float(bound)
    if margin > integral.error:
        raise ViolationError(
            f"Fock-limit inequality violated at k={k}, n={n}: margin={margin!r}"
        )
    return {"k": k, "n": n, "integral": integral, "bound": bound,
            "margin": margin, "error": integral.error}


def scaled_disk_integral(k: int, n: int, big_alpha: float, tol: float = 1e-10) -> Estimate:
    """The rescaled disk-side integral at weight parameter R = big_alpha:

        integral_0^R y^{k-n} (1 - y/R)^{R+2n-2} / F(1-R-n, -n; 1; y/R) dy.
    """
    r = float(big_alpha)
    p_coeffs = np.array([
        float(c) for c in hypergeom_poly_coeffs(
            HypergeomParams(1 - as_exact(big_alpha) - n, -n, 1))
    ])

    def integrand(y):
        frac = y / r
        # (1-y/R)^(R+2n-2) via log1p keeps the large exponent stable
        core = math.exp((r + 2 * n - 2) * math.log1p(-frac)) if frac < 1.0 else 0.0
        return y ** (k - n) * core / np.polynomial.polynomial.polyval(frac, p_coeffs)

    value, err = quad(integrand, 0.0, r, epsabs=tol, epsrel=tol, limit=400)
    return Estimate(value, max(err, abs(value) * 1e-15))


def fock_convergence_table(k: int, n: int, big_alphas, tol: float = 1e-10) -> dict:
    """Rescaled disk integrals along increasing R with gaps to the limit.

    Returns rows (R, value, error, gap) and whether the gaps shrink
    strictly, which exhibits the disk-to-Gaussian convergence.
    """
    big_alphas = list(big_alphas)
    if any(b <= a for a, b in zip(big_alphas, big_alphas[1:])):
        raise ValueError("big_alphas must be strictly increasing")
    limit = integrate_halfline_exp(
        lambda y: y ** (k - n) / laguerre_eval(n, y), tol=tol)
    rows = []
    for r in big_alphas:
        est = scaled_disk_integral(k, n, r, tol=tol)
        rows.append({"R": r, "value": est.value, "error": est.error,
                     "gap": abs(est.value - limit.value)})
    gaps = [row["gap"] for row in rows]
    return {
        "k": k, "n": n, "limit": limit, "rows": rows,
        "gaps_strictly_shrinking": all(b < a for a, b in zip(gaps, gaps[1:])),
    }
