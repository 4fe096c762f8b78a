"""Expected breakdown penalty of a drone serving a sequence of packages.

A drone assigned n packages attempts them one by one; before each attempt it
breaks down with probability p, in which case the attempted package and every
later one go undelivered and each costs the per-package penalty.  The expected
total penalty is

    sum_{j=1..n} (1-p)^(j-1) * p * c * (n - j + 1)

which only depends on how many packages the drone carries, not on which ones
or in which order.
"""

from __future__ import annotations

from fractions import Fraction

from .numeric import NumberLike, frac


def expected_penalty(n: int, p: NumberLike, c_pen: NumberLike) -> Fraction:
    """Closed-form expected penalty for n sequential deliveries.

    n >= 0; 0 <= p <= 1; c_pen >= 0.  Exact rational arithmetic.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    prob = frac(p)
    cost = frac(c_pen)
    if not 0 <= prob <= 1:
        raise ValueError("breakdown probability must be in [0, 1]")
    if cost < 0:
        raise ValueError("penalty cost must be non-negative")
    total = Fraction(0)
    survive = Fraction(1)  # (1-p)^(j-1)
    for j in range(1, n + 1):
        total += survive * prob * cost * (n - j + 1)
        survive *= 1 - prob
    return total


def penalty_step(n: int, p: NumberLike, c_pen: NumberLike) -> Fraction:
    """Marginal expected penalty of adding an n-th package: c * (1 - (1-p)^n).

    Telescopes expected_penalty: E(n) - E(n-1).  Marginals are non-decreasing
    in n, so c*p (the first step) is a valid per-package lower bound.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    prob = frac(p)
    return frac(c_pen) * (1 - (1 - prob) ** n)
