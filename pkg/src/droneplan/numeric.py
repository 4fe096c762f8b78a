"""Exact rational arithmetic helpers.

All money amounts, probabilities, distances and durations are held internally
as `fractions.Fraction` so that solver comparisons, Shapley sums and belief
recursions are exact.  Floats entering the system are converted to their exact
binary value; decimal strings (e.g. "0.1") convert to the exact decimal
rational.  Values leave the system as canonical strings: a terminating decimal
when the denominator is of the form 2^a * 5^b, "num/den" otherwise.
"""

from __future__ import annotations

from decimal import Decimal
from fractions import Fraction
from typing import Union

NumberLike = Union[int, float, str, Decimal, Fraction]


def frac(value: NumberLike) -> Fraction:
    """Convert a number-like value to an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a number here")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, (float, Decimal)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            return Fraction(text)
        try:
            return Fraction(Decimal(text))
        except ArithmeticError as exc:
            raise ValueError(f"not a number: {value!r}") from exc
    raise TypeError(f"cannot convert {type(value).__name__} to Fraction")


def frac_str(x: Fraction) -> str:
    """Canonical exact string for a Fraction.

    Terminating decimals render as decimals ("0.1", "-2", "3.25"); everything
    else renders as "num/den".  The output round-trips through frac() exactly.
    """
    x = Fraction(x)
    den = x.denominator
    twos = fives = 0
    d = den
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{x.numerator}/{x.denominator}"
    k = max(twos, fives)
    scaled = x.numerator * 10**k // den  # exact: den divides 10**k
    if k == 0:
        return str(scaled)
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).rjust(k + 1, "0")
    int_part, dec_part = digits[:-k], digits[-k:]
    dec_part = dec_part.rstrip("0")
    if not dec_part:
        return f"{sign}{int_part}"
    return f"{sign}{int_part}.{dec_part}"


def money_str(x: Fraction) -> str:
    """Render currency with exactly two decimals (round half to even)."""
    cents = round(Fraction(x) * 100)  # Fraction.__round__ is half-even
    sign = "-" if cents < 0 else ""
    cents = abs(cents)
    return f"{sign}{cents // 100}.{cents % 100:02d}"
