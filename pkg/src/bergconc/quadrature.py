"""Weighted quadrature on (0,1) and (0,inf) with error estimates.

Every numeric integral returned by this module carries an error estimate
(`Estimate`); no bare floats leave the quadrature layer.  Nodes and
weights come from scipy; the order-doubling / subdivision logic and the
error accounting are ours.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import quad
from scipy.special import roots_jacobi, roots_laguerre

from .errors import InvalidExponentError, NonConvergentError


class Estimate(NamedTuple):
    """A numeric value together with an estimated absolute error bound."""

    value: float
    error: float


_ORDERS = (32, 64, 128, 256, 512)
_MAX_DEPTH = 14


@lru_cache(maxsize=256)
def _jacobi_nodes(m: int, q: float, p: float):
    # scipy weight is (1-x)^q (1+x)^p on [-1,1]; t = (x+1)/2 maps it to
    # t^p (1-t)^q on [0,1] up to the factor 2^(p+q+1).
    x, w = roots_jacobi(m, q, p)
    t = 0.5 * (x + 1.0)
    return t, w / 2.0 ** (p + q + 1.0)


def _fixed_weighted(f, p: float, q: float, m: int) -> float:
    t, w = _jacobi_nodes(m, q, p)
    return float(np.dot(w, f(t)))


def _refine(values) -> tuple[float, float]:
    v_prev, v = values[-2], values[-1]
    err = abs(v - v_prev)
    return v, max(err, abs(v) * 1e-15, 1e-300)


def _integrate_piece(f, p, q, a, b, tol, depth):
    """t^p (1-t)^q f(t) over [a,b] within [0,1]; Jacobi weight kept in
    exact form on endpoint-touching pieces, folded into f elsewhere."""
    if a == 0.0 and b == 1.0:
        g, pe, qe = f, p, q
    elif a == 0.0:
        # t = b*u: weight t^p survives, (1-t)^q is smooth on [0,1)
        g = lambda u: b ** (p + 1) * (1.0 - b * u) ** q * f(b * u)
        pe, qe = p, 0.0
    elif b == 1.0:
        g = lambda u: (1.0 - a) ** (q + 1) * (a + (1.0 - a) * u) ** p * f(a + (1.0 - a) * u)
        pe, qe = 0.0, q
    else:
        g = lambda u: (b - a) * (a + (b - a) * u) ** p * (1.0 - a - (b - a) * u) ** q * f(a + (b - a) * u)
        pe, qe = 0.0, 0.0

    values = [_fixed_weighted(g, pe, qe, _ORDERS[0])]
    for m in _ORDERS[1:]:
        values.append(_fixed_weighted(g, pe, qe, m))
        v, err = _refine(values)
        if err <= tol:
            return v, err
    if depth <= 0:
        raise NonConvergentError(
            f"weighted quadrature stalled on [{a}, {b}] (estimated error {err:.3e} > tol {tol:.3e})"
        )
    mid = 0.5 * (a + b)
    v1, e1 = _integrate_piece(f, p, q, a, mid, 0.5 * tol, depth - 1)
    v2, e2 = _integrate_piece(f, p, q, mid, b, 0.5 * tol, depth - 1)
    return v1 + v2, e1 + e2


def integrate_01_weighted(f: Callable, p: float, q: float, tol: float = 1e-12) -> Estimate:
    """Integral of t^p (1-t)^q f(t) over (0,1), with estimated error <= tol.

    Fixed-order Gauss-Jacobi with order doubling; the error estimate is the
    last order-refinement difference.  If doubling stalls, the interval is
    bisected recursively (endpoint weights stay in Gauss-Jacobi form, the
    interior uses Gauss-Legendre with the weight folded into the integrand).

    Raises InvalidExponentError for p <= -1 or q <= -1 and
    NonConvergentError when refinement stalls.
    """
    if p <= -1.0 or q <= -1.0:
        raise InvalidExponentError(f"endpoint exponents must be > -1, got p={p}, q={q}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    value, err = _integrate_piece(f, float(p), float(q), 0.0, 1.0, tol, _MAX_DEPTH)
    return Estimate(value, err)


@lru_cache(maxsize=16)
def _laguerre_nodes(m: int):
    return roots_laguerre(m)


def integrate_halfline_exp(f: Callable, tol: float = 1e-10) -> Estimate:
    """Integral of e^{-y} f(y) over (0, inf) for f of polynomial growth.

    Adaptive quadrature (QUADPACK, infinite-interval transform) with its
    reported error bound, cross-checked against a Gauss-Laguerre pair; the
    reported error is the larger of the two indicators.
    """
    value, quad_err = quad(lambda y: math.exp(-y) * f(y), 0.0, math.inf,
                           epsabs=0.25 * tol, epsrel=0.25 * tol, limit=400)
    x1, w1 = _laguerre_nodes(120)
    x2, w2 = _laguerre_nodes(240)
    g1 = float(np.dot(w1, np.asarray(f(x1), dtype=float)))
    g2 = float(np.dot(w2, np.asarray(f(x2), dtype=float)))
    # Gauss-Laguerre converges slowly for non-polynomial f, so it can only
    # raise the error bar when it is self-consistent yet contradicts quad.
    gl_self = abs(g2 - g1)
    disagreement = abs(g2 - value)
    indicator = disagreement if disagreement > 3.0 * gl_self else 0.0
    err = max(quad_err, indicator, abs(value) * 1e-15)
    if err > max(tol, abs(value) * tol):
        raise NonConvergentError(
            f"half-line quadrature error {err:.3e} exceeds tol {tol:.3e}"
        )
    return Estimate(value, err)
