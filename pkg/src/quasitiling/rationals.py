"""Exact rational helpers: parsing, formatting and dyadic searches."""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Optional, Union

RationalLike = Union[Fraction, int, str, float]

MAX_DYADIC_EXPONENT = 40


def as_rational(value: RationalLike) -> Fraction:
    """Convert ``value`` to a :class:`Fraction` without binary rounding noise.

    Floats are routed through their shortest ``repr`` so that ``0.49`` becomes
    ``49/100`` rather than the exact binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a rational")


def fmt_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def ceil_fraction(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


def largest_dyadic(
    predicate: Callable[[Fraction], bool],
    kmax: int = MAX_DYADIC_EXPONENT,
    kmin: int = 1,
) -> Optional[Fraction]:
    """Return the largest ``2**-k`` (``kmin <= k <= kmax``) satisfying ``predicate``."""
    for k in range(kmin, kmax + 1):
        candidate = Fraction(1, 2**k)
        if predicate(candidate):
            return candidate
    return None
