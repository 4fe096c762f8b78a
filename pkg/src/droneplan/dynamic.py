"""Dynamic Bayesian coalition formation: observe deliveries, update beliefs.

Each iteration plans with the current beliefs (merge-and-split), executes the
plan against a ground-truth misbehavior model, observes per-pair delivery
counts, and refreshes the belief matrix with a Bayes-derived raw estimate
smoothed by an exponential moving average.  Pairs with no transfers carry
their beliefs over unchanged.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .coalition import BayesianGame, BeliefMatrix, merge_split, transfer_counts
from .costshare import CharacteristicCache
from .model import CoalitionStructure, DeliveryScenario
from .numeric import NumberLike, frac
from .program import Mode

DEFAULT_ERROR_PROB = Fraction(1, 20)  # delivery error probability epsilon
DEFAULT_W1 = Fraction(1, 2)
DEFAULT_W2 = Fraction(1, 2)
CONVERGENCE_TOL = Fraction(1, 1000)


class NoObservationError(Exception):
    pass


def outcome_probabilities(theta: int, theta_ok: int) -> tuple[Fraction, Fraction]:
    """(P(success), P(failure)) of a transferred package, from observed counts."""
    if theta <= 0:
        raise NoObservationError("no observation")
    if not 0 <= theta_ok <= theta:
        raise ValueError("delivered count must be between 0 and the assigned count")
    success = Fraction(theta_ok, theta)
    return success, 1 - success


def raw_belief(theta: int, theta_ok: int, eps: NumberLike) -> Fraction:
    """Single-observation belief that the partner is a good shipper.

    Good shippers fail only through the error channel (probability eps), so a
    success ratio of at least 1-eps is fully consistent with a good partner;
    anything lower scales down proportionally.
    """
    error = frac(eps)
    if not 0 <= error < 1:
        raise ValueError("error probability must be in [0, 1)")
    success, _ = outcome_probabilities(theta, theta_ok)
    if success < 1 - error:
        return success / (1 - error)
    return Fraction(1)


def ema_update(lambda_old: NumberLike, lambda_raw: NumberLike,
               w1: NumberLike, w2: NumberLike) -> Fraction:
    """Blend the previous belief with the new raw estimate: w1*old + w2*raw."""
    a, b = frac(w1), frac(w2)
    if a + b != 1 or not (0 <= a <= 1 and 0 <= b <= 1):
        raise ValueError("weights must be in [0, 1] and sum to 1")
    old, raw = frac(lambda_old), frac(lambda_raw)
    for name, v in (("lambda_old", old), ("lambda_raw", raw)):
        if not 0 <= v <= 1:
            raise ValueError(f"{name} must be in [0, 1]")
    return a * old + b * raw


@dataclass(frozen=True)
class ObservationRecord:
    iteration: int
    pair: tuple[str, str]
    assigned: int  # packages handed over
    delivered: int  # packages actually delivered

    def __post_init__(self) -> None:
        if not 0 <= self.delivered <= self.assigned:
            raise ValueError("0 <= delivered <= assigned required")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    structure: CoalitionStructure
    beliefs: dict[tuple[str, str], Fraction]  # state used for this iteration's plan
    observations: tuple[ObservationRecord, ...]
    costs: dict[str, Fraction]  # per-shipper expected payoff under the plan
    max_delta: Fraction  # largest single-pair belief change this iteration
    beliefs_after: dict[tuple[str, str], Fraction]  # state after the update


def _stream_key(*parts: object) -> np.random.SeedSequence:
    ints = []
    for part in parts:
        if isinstance(part, int):
            ints.append(part & 0xFFFFFFFFFFFFFFFF)
        else:
            digest = hashlib.sha256(str(part).encode()).digest()
            ints.append(int.from_bytes(digest[:8], "big"))
    return np.random.SeedSequence(ints)


def run_dynamic(scenario: DeliveryScenario,
                truth: Mapping[str, NumberLike],
                initial_beliefs: BeliefMatrix,
                eps: NumberLike = DEFAULT_ERROR_PROB,
                w1: NumberLike = DEFAULT_W1,
                w2: NumberLike = DEFAULT_W2,
                max_iters: int = 20,
                seed: int = 0,
                mode: Mode = Mode.STOCHASTIC,
                convergence_tol: NumberLike = CONVERGENCE_TOL,
                cache: CharacteristicCache | None = None) -> list[IterationRecord]:
    """Iterate plan / deliver / observe / update until beliefs settle.

    truth maps each shipper to the probability that it fails to deliver a
    package transferred to it (sampled independently per package).  Beliefs
    update only for ordered pairs that actually transferred packages this
    iteration.  Stops after two consecutive iterations whose largest belief
    change is below convergence_tol, or at max_iters.
    """
    error = frac(eps)
    weight_old, weight_new = frac(w1), frac(w2)
    tol = frac(convergence_tol)
    misbehave = {sid: frac(p) for sid, p in truth.items()}
    for sid, p in misbehave.items():
        if not 0 <= p <= 1:
            raise ValueError(f"misbehavior probability for {sid} must be in [0, 1]")

    cache = cache if cache is not None else CharacteristicCache(scenario, mode)
    beliefs = initial_beliefs
    records: list[IterationRecord] = []
    quiet_streak = 0
    for t in range(1, max_iters + 1):
        result = merge_split(scenario, beliefs, mode=mode, cache=cache)
        structure = result.structure
        game = BayesianGame(scenario, beliefs, mode, cache)
        costs = {p: game.payoff(p, structure.coalition_of(p))
                 for p in scenario.shipper_ids()}

        observations: list[ObservationRecord] = []
        updates: dict[tuple[str, str], Fraction] = {}
        max_delta = Fraction(0)
        for coalition in structure:
            theta = transfer_counts(cache.solution(coalition))
            for (p, q), assigned in sorted(theta.items()):
                if assigned <= 0:
                    continue
                rng = np.random.default_rng(_stream_key(seed, t, p, q))
                failed = int(rng.binomial(assigned, float(misbehave.get(q, Fraction(0)))))
                delivered = assigned - failed
                observations.append(ObservationRecord(t, (p, q), assigned, delivered))
                new_lambda = ema_update(beliefs.get(p, q),
                                        raw_belief(assigned, delivered, error),
                                        weight_old, weight_new)
                updates[(p, q)] = new_lambda
                delta = abs(new_lambda - beliefs.get(p, q))
                if delta > max_delta:
                    max_delta = delta

        after = beliefs.updated(updates)
        records.append(IterationRecord(
            t, structure, dict(beliefs.items()), tuple(observations), costs,
            max_delta, dict(after.items())))
        beliefs = after
        quiet_streak = quiet_streak + 1 if max_delta < tol else 0
        if quiet_streak >= 2:
            break
    return records
