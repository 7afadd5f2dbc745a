"""Exact rational arithmetic helpers.

Every "exact" claim made by this library runs on `fractions.Fraction`
values: arbitrary-precision rationals that are reduced (gcd = 1, positive
denominator) after every operation, so additions, multiplications,
divisions and integer powers never round.  Floats entering an exact path
are converted through their exact binary value.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

ExactScalar = Fraction
Scalar = Union[int, float, Fraction]


def as_exact(x: Scalar | str) -> Fraction:
    """Convert x to an exact rational.

    Strings accept both "p/q" and decimal forms ("5/2", "2.5").  Floats
    convert through their exact binary value, so only pass floats that are
    exactly representable (2.5, 0.125, ...) when the result feeds an exact
    identity check.
    """
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


def exact_str(q: Fraction) -> str:
    """Serialize an exact rational as "num/den" (never as a float)."""
    return f"{q.numerator}/{q.denominator}"


def is_nonpositive_integer(x: Scalar) -> bool:
    if isinstance(x, float):
        return x <= 0 and x.is_integer()
    if isinstance(x, Fraction):
        return x <= 0 and x.denominator == 1
    return isinstance(x, int) and x <= 0


def pochhammer(x: Scalar, k: int):
    """Rising factorial x(x+1)...(x+k-1); the empty product (k=0) is 1.

    The result has the kind of x: exact in, exact out.
    """
    if k < 0:
        raise ValueError(f"pochhammer needs k >= 0, got {k}")
    one = x - x + 1  # unit of the same kind as x
    out = one
    for i in range(k):
        out *= x + i
    return out


def gamma_ratio(alpha: Scalar, m: int):
    """Gamma(alpha + m) / Gamma(alpha) for integer m of either sign.

    Equals pochhammer(alpha, m) for m >= 0 and
    1 / pochhammer(alpha + m, -m) for m < 0.
    """
    if m >= 0:
        return pochhammer(alpha, m)
    denom = pochhammer(alpha + m, -m)
    one = alpha - alpha + 1
    return one / denom
