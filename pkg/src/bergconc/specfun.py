"""Special-function kernel: Pochhammer symbols, Gauss hypergeometric sums,
Jacobi and Laguerre polynomials.

The Gauss hypergeometric function is F(a,b;c;x) = sum_k (a)_k (b)_k /
((c)_k k!) x^k.  Two evaluation routes are provided: exact summation of
terminating series (a or b a nonpositive integer) and a floating-point
partial sum with a certified geometric tail bound for 0 <= x < 1.  All
operations are pure functions, safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import NonConvergentError
from .exact import Scalar, as_exact, is_nonpositive_integer, pochhammer
from .quadrature import Estimate

_MAX_SERIES_TERMS = 10 ** 6
# below this stop index, float terminating sums are routed through exact
# rationals and rounded once at the end (kills cancellation in
# alternating sums)
_EXACT_DELEGATION_LIMIT = 30


@dataclass(frozen=True)
class HypergeomParams:
    """Parameter triple (a, b, c) of a Gauss hypergeometric series."""

    a: Scalar
    b: Scalar
    c: Scalar
    terminating: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self, "terminating",
            is_nonpositive_integer(self.a) or is_nonpositive_integer(self.b),
        )
        if not self.terminating and is_nonpositive_integer(self.c):
            raise ValueError(
                f"c={self.c} is a nonpositive integer but the series does not terminate"
            )

    @property
    def stop_index(self) -> int:
        """Largest k with a nonzero term, for terminating series."""
        if not self.terminating:
            raise ValueError("series does not terminate")
        stops = [int(-v) for v in (self.a, self.b) if is_nonpositive_integer(v)]
        return min(stops)


def hypergeom_poly_coeffs(params: HypergeomParams) -> list:
    """Exact coefficient list [c_0..c_m] of a terminating F(a,b;c;t).

    c_k = (a)_k (b)_k / ((c)_k k!), computed over rationals.
    """
    a, b, c = as_exact(params.a), as_exact(params.b), as_exact(params.c)
    m = params.stop_index
    coeffs = [Fraction(1)]
    term = Fraction(1)
    for k in range(m):
        term *= (a + k) * (b + k)
        term /= (c + k) * (k + 1)
        coeffs.append(term)
    return coeffs


def hypergeom_terminating(params: HypergeomParams, t: Scalar):
    """Evaluate a terminating hypergeometric sum; exact for exact inputs.

    Float inputs with stop index <= 30 are delegated to the exact path and
    rounded once at the end.
    """
    if not params.terminating:
        raise ValueError("hypergeom_terminating needs a nonpositive-integer parameter")
    exact_inputs = not any(isinstance(v, float) for v in (params.a, params.b, params.c, t))
    if exact_inputs or params.stop_index <= _EXACT_DELEGATION_LIMIT:
        coeffs = hypergeom_poly_coeffs(params)
        te = as_exact(t)
        acc = Fraction(0)
        for ck in reversed(coeffs):
            acc = acc * te + ck
        return acc if exact_inputs else float(acc)
    # long float series: plain Horner over float coefficients
    a, b, c = float(params.a), float(params.b), float(params.c)
    m = params.stop_index
    coeffs_f = [1.0]
    term = 1.0
    for k in range(m):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1))
        coeffs_f.append(term)
    acc = 0.0
    for ck in reversed(coeffs_f):
        acc = acc * t + ck
    return acc


def hypergeom_series(params: HypergeomParams, x: float, tol: float = 1e-13,
                     max_terms: int = _MAX_SERIES_TERMS) -> Estimate:
    """Partial sum of F(a,b;c;x) for 0 <= x < 1 with a certified tail bound.

    Terms are added until the term ratio is below 1 and decreasing, at
    which point the remaining tail is bounded by the geometric majorant
    |T_{k+1}| r / (1-r) with r the current ratio magnitude.  Returns the
    partial sum and the bound actually used.

    Raises NonConvergentError when the bound cannot be met within
    max_terms (e.g. x too close to 1 with c-a-b <= 0).
    """
    if not (0.0 <= x < 1.0):
        raise ValueError(f"series evaluation needs 0 <= x < 1, got {x}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    a, b, c = float(params.a), float(params.b), float(params.c)

    def ratio_at(k: int) -> float:
        return (a + k) * (b + k) / ((c + k) * (k + 1.0)) * x

    total = 1.0
    term = 1.0
    prev_r = abs(ratio_at(0))
    steady = 0
    for k in range(max_terms):
        ratio = ratio_at(k)
        term *= ratio
        if term == 0.0:  # terminated exactly
            return Estimate(total, 0.0)
        total += term
        # the term-ratio magnitude is a rational function of k converging
        # to |x|; once it behaves monotonically, the tail is geometric with
        # ratio at most max(next ratio, |x|)
        r_next = abs(ratio_at(k + 1))
        steady = steady + 1 if abs(r_next - abs(x)) <= abs(prev_r - abs(x)) else 0
        prev_r = r_next
        r_hat = max(r_next, abs(x))
        if r_hat < 1.0 and steady >= 3:
            bound = abs(term) * r_hat / (1.0 - r_hat)
            if bound <= tol:
                return Estimate(total, bound)
    raise NonConvergentError(
        f"hypergeometric series did not reach tail bound {tol:.1e} in {max_terms} terms"
    )


def jacobi_eval(n: int, alpha: float, x: float) -> float:
    """Jacobi polynomial P_n^{(0, alpha-1)}(x) by the three-term recurrence.

    The recurrence is preferred over the hypergeometric form because the
    arguments used here exceed 1 (the map (1+t)/(1-t) sends (0,1) to
    (1,inf)), where the series form cancels badly.
    """
    return _jacobi_recurrence(n, 0.0, alpha - 1.0, x)


def _jacobi_recurrence(n: int, a: float, b: float, x: float) -> float:
    if n < 0:
        raise ValueError("polynomial degree must be >= 0")
    if n == 0:
        return 1.0
    p_prev = 1.0
    p = 0.5 * (a - b) + 0.5 * (a + b + 2.0) * x
    for k in range(2, n + 1):
        s = 2.0 * k + a + b
        c1 = 2.0 * k * (k + a + b) * (s - 2.0)
        c2 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b)
        c3 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s
        p, p_prev = (c2 * p - c3 * p_prev) / c1, p
    return p


def laguerre_eval(n: int, y):
    """L_n(-y) = sum_k C(n,k) y^k / k!, positive for y >= 0.

    Accepts scalars or numpy arrays for y.
    """
    if n < 0:
        raise ValueError("polynomial degree must be >= 0")
    total = 1.0 + 0.0 * y
    term = total
    for k in range(n):
        term = term * y * (n - k) / ((k + 1.0) * (k + 1.0))
        total = total + term
    return total
