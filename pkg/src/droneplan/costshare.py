"""Characteristic function over coalitions and Shapley cost shares.

The characteristic value of a coalition is the exact optimum of its package
assignment.  Shares are computed with the classical subset-sum Shapley
formula in exact rational arithmetic, so the efficiency identity
(shares sum to the coalition cost) holds bit-exactly.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Callable, Iterable, Mapping

from .model import Coalition, DeliveryScenario
from .program import Mode
from .solver import AssignmentSolution, solve_assignment

SHAPLEY_SIZE_LIMIT = 8


class ShapleySizeError(Exception):
    pass


@dataclass(frozen=True)
class CostAllocation:
    coalition: Coalition
    shares: dict[str, Fraction]

    @property
    def total(self) -> Fraction:
        return sum(self.shares.values(), Fraction(0))


class CharacteristicCache:
    """Memo of coalition -> optimal cost, bound to one scenario and mode.

    Misses solve the assignment once and also retain the full solution (the
    coalition games need the transfer counts).  Safe for concurrent readers;
    duplicate concurrent misses may both solve, which is harmless because the
    solver is deterministic.
    """

    def __init__(self, scenario: DeliveryScenario, mode: Mode = Mode.STOCHASTIC):
        self.scenario = scenario
        self.mode = mode
        self.fingerprint = scenario.fingerprint()
        self.entries: dict[Coalition, Fraction] = {}
        self.solutions: dict[Coalition, AssignmentSolution] = {}
        self.solve_count = 0
        self._lock = threading.Lock()

    def check_scenario(self, scenario: DeliveryScenario) -> None:
        if scenario.fingerprint() != self.fingerprint:
            raise ValueError("characteristic cache used with a different scenario")

    def solution(self, coalition: Coalition) -> AssignmentSolution:
        with self._lock:
            hit = self.solutions.get(coalition)
        if hit is not None:
            return hit
        sol = solve_assignment(self.scenario, coalition, self.mode)
        with self._lock:
            self.solutions[coalition] = sol
            self.entries[coalition] = sol.objective
            self.solve_count += 1
        return sol

    def cost(self, coalition: Coalition) -> Fraction:
        with self._lock:
            hit = self.entries.get(coalition)
        if hit is not None:
            return hit
        return self.solution(coalition).objective

    def preload(self, items: Iterable[tuple[Coalition, AssignmentSolution]]) -> None:
        with self._lock:
            for coalition, sol in items:
                self.solutions[coalition] = sol
                self.entries[coalition] = sol.objective


def characteristic_cost(cache: CharacteristicCache, scenario: DeliveryScenario,
                        coalition: Coalition) -> Fraction:
    """Optimal delivery cost of the coalition, memoized and idempotent."""
    cache.check_scenario(scenario)
    return cache.cost(coalition)


def shapley_values(members: Iterable[str],
                   cost_of: Callable[[frozenset[str]], Fraction]) -> dict[str, Fraction]:
    """Shapley shares of an arbitrary characteristic function.

    cost_of receives frozensets of member ids; the empty set is never queried
    (its value is taken as zero).  Subsets are enumerated by bitmask over the
    sorted member list for determinism.
    """
    ordered = tuple(sorted(members))
    n = len(ordered)
    if n > SHAPLEY_SIZE_LIMIT:
        raise ShapleySizeError(
            f"Shapley size limit: {n} members exceeds {SHAPLEY_SIZE_LIMIT}")
    fact = [factorial(k) for k in range(n + 1)]
    values: dict[int, Fraction] = {0: Fraction(0)}
    for mask in range(1, 1 << n):
        subset = frozenset(ordered[i] for i in range(n) if mask >> i & 1)
        values[mask] = Fraction(cost_of(subset))
    shares: dict[str, Fraction] = {}
    full = (1 << n) - 1
    for i, player in enumerate(ordered):
        rest = full & ~(1 << i)
        acc = Fraction(0)
        sub = rest
        while True:  # iterate all submasks of rest, including 0
            size = bin(sub).count("1")
            weight = Fraction(fact[size] * fact[n - size - 1], fact[n])
            acc += weight * (values[sub | (1 << i)] - values[sub])
            if sub == 0:
                break
            sub = (sub - 1) & rest
        shares[player] = acc
    return shares


def shapley(cache: CharacteristicCache, scenario: DeliveryScenario,
            coalition: Coalition) -> CostAllocation:
    """Split the coalition's optimal cost by average marginal contribution."""
    cache.check_scenario(scenario)
    shares = shapley_values(
        coalition.members,
        lambda subset: cache.cost(Coalition(subset)))
    return CostAllocation(coalition, shares)


def shapley_by_permutations(members: Iterable[str],
                            cost_of: Callable[[frozenset[str]], Fraction]) -> dict[str, Fraction]:
    """Independent oracle: average marginal contribution over all join orders."""
    from itertools import permutations

    ordered = tuple(sorted(members))
    totals = {m: Fraction(0) for m in ordered}
    count = 0
    for perm in permutations(ordered):
        so_far: frozenset[str] = frozenset()
        prev = Fraction(0)
        for player in perm:
            nxt = so_far | {player}
            value = Fraction(cost_of(nxt))
            totals[player] += value - prev
            so_far, prev = nxt, value
        count += 1
    return {m: totals[m] / count for m in ordered}
