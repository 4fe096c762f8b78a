"""Monte Carlo execution of assignment plans.

Each run replays the planned deliveries: every used drone attempts its
packages in canonical (sorted customer id) order and breaks down before each
attempt with its breakdown probability, after which the attempted and all
remaining packages of that drone go undelivered; every package transferred to
another shipper is dropped pre-flight with the receiving shipper's
misbehavior probability.  Outsourced packages always arrive.

Realized cost rules (plan components are charged as planned unless noted):
  - legs up to and including a failed attempt are charged, later legs are not
    flown and not charged; pre-flight misbehavior drops are never flown
  - every undelivered package costs the per-package penalty, charged to the
    package owner
  - per-shipper attribution = the shipper's Shapley-weighted share of the
    planned non-penalty components plus the realized penalties it owns

Randomness comes from the Philox counter-based generator.  Each drone (and
each misbehaving receiver) owns one stream keyed by (seed, kind, id); run r
reads the fixed-width slice [r*stride, (r+1)*stride) of that stream, so runs
are independent, reproducible, and adding drones or runs never perturbs the
draws of existing ones.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .coalition import BeliefMatrix, merge_split
from .costshare import CharacteristicCache, CostAllocation, shapley
from .model import Coalition, CoalitionStructure, DeliveryScenario, distance
from .numeric import frac
from .program import Mode
from .solver import AssignmentSolution, evaluate_objective

_CHUNK_CELLS = 1 << 22


@dataclass(frozen=True)
class SimConfig:
    runs: int
    seed: int = 0
    misbehavior: Mapping[str, Fraction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        for sid, p in self.misbehavior.items():
            if not 0 <= frac(p) <= 1:
                raise ValueError(f"misbehavior probability for {sid} not in [0, 1]")


@dataclass(frozen=True)
class RunEvent:
    run: int
    drone_failures: dict[str, int]  # drone -> 0-based attempt index of breakdown
    failed_packages: tuple[str, ...]
    flown_packages: tuple[str, ...]
    total_cost: Fraction


@dataclass(frozen=True)
class SimReport:
    runs: int
    per_shipper_mean: dict[str, Fraction]
    per_shipper_stderr: dict[str, float]
    per_coalition_mean: dict[Coalition, Fraction]
    mean_penalty: Fraction
    assigned_count: int  # drone-borne package attempts over all runs
    delivered_count: int
    samples: dict[str, tuple[float, ...]] | None = None
    events: tuple[RunEvent, ...] | None = None

    @property
    def total_mean(self) -> Fraction:
        return sum(self.per_coalition_mean.values(), Fraction(0))


def _stream(seed: int, kind: str, name: str) -> np.random.SeedSequence:
    digest = hashlib.sha256(f"{kind}:{name}".encode()).digest()
    return np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF,
                                   int.from_bytes(digest[:8], "big")])


def _uniform_matrix(seed: int, kind: str, name: str, runs: int, width: int) -> np.ndarray:
    """runs x width uniforms; row r is run r's substream slice."""
    stride = max(4, ((width + 3) // 4) * 4)
    gen = np.random.Generator(np.random.Philox(_stream(seed, kind, name)))
    rows_per_chunk = max(1, _CHUNK_CELLS // stride)
    out = np.empty((runs, width))
    done = 0
    while done < runs:
        take = min(rows_per_chunk, runs - done)
        block = gen.random((take, stride))
        out[done:done + take] = block[:, :width]
        done += take
    return out


@dataclass
class _CoalitionPlan:
    coalition: Coalition
    solution: AssignmentSolution
    base_share: dict[str, Fraction]  # per-shipper share of planned non-penalty cost
    drone_loads: dict[str, list[str]]  # drone -> customers in attempt order
    drone_depot: dict[str, str]
    leg_cost: dict[str, Fraction]  # customer -> round-trip routing cost
    transferred_to: dict[str, list[str]]  # receiver -> customers in order


def _prepare(scenario: DeliveryScenario, structure: CoalitionStructure,
             solutions: Mapping[Coalition, AssignmentSolution],
             allocations: Mapping[Coalition, CostAllocation] | None,
             cache: CharacteristicCache | None) -> list[_CoalitionPlan]:
    if structure.shippers() != scenario.shipper_ids():
        raise ValueError("structure must partition the scenario's shipper set")
    if set(solutions) != set(structure.coalitions):
        raise ValueError("solutions do not match the coalition structure")
    plans = []
    for coalition in structure:
        sol = solutions[coalition]
        if sol.coalition != coalition:
            raise ValueError("solution labelled with a different coalition")
        breakdown = evaluate_objective(scenario, coalition, sol, sol.mode)
        planned_det = (breakdown.initial + breakdown.routing
                       + breakdown.transfer + breakdown.outsource)
        if allocations is not None and coalition in allocations:
            shares = allocations[coalition].shares
        else:
            local = cache if cache is not None and cache.mode is sol.mode \
                else CharacteristicCache(scenario, sol.mode)
            local.preload([(coalition, sol)])
            shares = shapley(local, scenario, coalition).shares
        total = sol.objective
        base_share = {}
        for p in coalition.members:
            if total == 0:
                base_share[p] = Fraction(0)
            else:
                base_share[p] = shares[p] * planned_det / total

        loads: dict[str, list[str]] = {}
        depot: dict[str, str] = {}
        legs: dict[str, Fraction] = {}
        received: dict[str, list[str]] = {}
        for (c, d, p), v in sorted(sol.assign.items()):
            if not v:
                continue
            loads.setdefault(d, []).append(c)
            depot[d] = p
            legs[c] = 2 * scenario.costs.routing_rate * distance(
                scenario.shipper(p).depot, scenario.customer(c).location)
            owner = scenario.customer(c).owner
            if owner != p:
                received.setdefault(p, []).append(c)
        plans.append(_CoalitionPlan(coalition, sol, base_share, loads, depot,
                                    legs, received))
    return plans


def simulate_plan(scenario: DeliveryScenario, structure: CoalitionStructure,
                  solutions: Mapping[Coalition, AssignmentSolution],
                  config: SimConfig,
                  allocations: Mapping[Coalition, CostAllocation] | None = None,
                  cache: CharacteristicCache | None = None,
                  keep_samples: bool = False,
                  keep_events: bool = False) -> SimReport:
    """Replay the plan config.runs times and aggregate realized costs."""
    plans = _prepare(scenario, structure, solutions, allocations, cache)
    runs = config.runs
    cpen = scenario.costs.penalty_cost
    mis = {sid: float(frac(p)) for sid, p in config.misbehavior.items()}

    shipper_ids = scenario.shipper_ids()
    fails_by_shipper = {p: np.zeros(runs, dtype=np.int64) for p in shipper_ids}
    fail_runs_total = 0
    assigned_total = 0
    delivered_total = 0
    per_coalition_mean: dict[Coalition, Fraction] = {}
    events: list[dict] = [dict(run=r, drone_failures={}, failed=[], flown=[])
                          for r in range(runs)] if keep_events else []

    for plan in plans:
        coalition_fail_runs = np.zeros(runs, dtype=np.int64)
        flown_cost_runs = np.zeros(runs) if keep_samples or keep_events else None
        flown_mean_cost = Fraction(0)

        # pre-flight misbehavior drops, per receiving shipper
        dropped: dict[str, np.ndarray] = {}
        for receiver, custs in sorted(plan.transferred_to.items()):
            rate = mis.get(receiver, 0.0)
            if rate <= 0 or not custs:
                continue
            u = _uniform_matrix(config.seed, "misbehavior", receiver, runs, len(custs))
            mask = u < rate
            for idx, c in enumerate(custs):
                dropped[c] = mask[:, idx]

        for drone_id in sorted(plan.drone_loads):
            load = plan.drone_loads[drone_id]
            n = len(load)
            if n == 0:
                continue
            assigned_total += n * runs
            p_break = float(scenario.drone(drone_id).breakdown_prob)
            kept = np.ones((runs, n), dtype=bool)
            for idx, c in enumerate(load):
                if c in dropped:
                    kept[:, idx] = ~dropped[c]
            kept_rank = np.cumsum(kept, axis=1) - 1  # index among kept attempts
            kept_counts = kept.sum(axis=1)

            u = _uniform_matrix(config.seed, "drone", drone_id, runs, n)
            hit = u < p_break
            col = np.arange(n)
            valid_hit = hit & (col[None, :] < kept_counts[:, None])
            any_break = valid_hit.any(axis=1)
            first_break = np.where(any_break, valid_hit.argmax(axis=1), n)

            flown = kept & (kept_rank <= first_break[:, None])
            delivered = kept & (kept_rank < first_break[:, None])
            failed = ~delivered

            delivered_total += int(delivered.sum())
            coalition_fail_runs += failed.sum(axis=1)
            fail_runs_total += int(failed.sum())
            for idx, c in enumerate(load):
                owner = scenario.customer(c).owner
                fails_by_shipper[owner] += failed[:, idx].astype(np.int64)
                flown_count = int(flown[:, idx].sum())
                flown_mean_cost += plan.leg_cost[c] * flown_count
                if flown_cost_runs is not None:
                    flown_cost_runs += flown[:, idx] * float(plan.leg_cost[c])
            if keep_events:
                for r in range(runs):
                    if any_break[r]:
                        events[r]["drone_failures"][drone_id] = int(first_break[r])
                    events[r]["failed"].extend(
                        load[i] for i in range(n) if failed[r, i])
                    events[r]["flown"].extend(
                        load[i] for i in range(n) if flown[r, i])

        breakdown = evaluate_objective(scenario, plan.coalition, plan.solution,
                                       plan.solution.mode)
        fixed = breakdown.initial + breakdown.transfer + breakdown.outsource
        mean_cost = (fixed + flown_mean_cost / runs
                     + cpen * int(coalition_fail_runs.sum()) / runs)
        per_coalition_mean[plan.coalition] = mean_cost
        if keep_events:
            for r in range(runs):
                run_cost = fixed + cpen * int(coalition_fail_runs[r])
                for c in events[r]["flown"]:
                    if c in plan.leg_cost:
                        run_cost += plan.leg_cost[c]
                events[r]["cost"] = events[r].get("cost", Fraction(0)) + run_cost

    base_total = {p: Fraction(0) for p in shipper_ids}
    for plan in plans:
        for p, share in plan.base_share.items():
            base_total[p] += share

    per_shipper_mean = {}
    per_shipper_stderr = {}
    samples: dict[str, tuple[float, ...]] = {}
    cpen_f = float(cpen)
    for p in shipper_ids:
        fails = fails_by_shipper[p]
        per_shipper_mean[p] = base_total[p] + cpen * int(fails.sum()) / runs
        per_run = float(base_total[p]) + cpen_f * fails.astype(float)
        if runs > 1:
            per_shipper_stderr[p] = float(per_run.std(ddof=1) / np.sqrt(runs))
        else:
            per_shipper_stderr[p] = 0.0
        if keep_samples:
            samples[p] = tuple(float(x) for x in per_run)

    mean_penalty = cpen * fail_runs_total / runs
    event_records = None
    if keep_events:
        event_records = tuple(
            RunEvent(run=e["run"], drone_failures=dict(e["drone_failures"]),
                     failed_packages=tuple(sorted(e["failed"])),
                     flown_packages=tuple(sorted(e["flown"])),
                     total_cost=e.get("cost", Fraction(0)))
            for e in events)
    return SimReport(
        runs=runs,
        per_shipper_mean=per_shipper_mean,
        per_shipper_stderr=per_shipper_stderr,
        per_coalition_mean=per_coalition_mean,
        mean_penalty=mean_penalty,
        assigned_count=assigned_total,
        delivered_count=delivered_total,
        samples=samples if keep_samples else None,
        events=event_records)


FRAMEWORKS = ("DDD", "SDD", "CoDDD", "CoSDD", "BCoSDD")


@dataclass(frozen=True)
class FrameworkOutcome:
    framework: str
    structure: CoalitionStructure
    report: SimReport


def compare_frameworks(scenario: DeliveryScenario, config: SimConfig,
                       beliefs: BeliefMatrix | None = None,
                       keep_samples: bool = False) -> dict[str, FrameworkOutcome]:
    """Simulate the five planning frameworks under identical random draws.

    DDD/SDD plan per shipper alone (deterministic/stochastic objective);
    CoDDD/CoSDD let shippers cooperate assuming everyone is reliable;
    BCoSDD cooperates using the supplied belief matrix.  All plans are then
    executed by simulate_plan with the same seed, so breakdown and
    misbehavior draws coincide wherever plans coincide.
    """
    shipper_ids = scenario.shipper_ids()
    trusting = BeliefMatrix.all_good(shipper_ids)
    if beliefs is None:
        beliefs = trusting
    det_cache = CharacteristicCache(scenario, Mode.DETERMINISTIC)
    sto_cache = CharacteristicCache(scenario, Mode.STOCHASTIC)
    singles = CoalitionStructure.singletons(shipper_ids)

    def outcome(name: str, structure: CoalitionStructure,
                cache: CharacteristicCache) -> FrameworkOutcome:
        solutions = {c: cache.solution(c) for c in structure}
        allocations = {c: shapley(cache, scenario, c) for c in structure}
        report = simulate_plan(scenario, structure, solutions, config,
                               allocations=allocations, cache=cache,
                               keep_samples=keep_samples)
        return FrameworkOutcome(name, structure, report)

    results: dict[str, FrameworkOutcome] = {}
    results["DDD"] = outcome("DDD", singles, det_cache)
    results["SDD"] = outcome("SDD", singles, sto_cache)
    results["CoDDD"] = outcome(
        "CoDDD", merge_split(scenario, trusting, mode=Mode.DETERMINISTIC,
                             cache=det_cache).structure, det_cache)
    results["CoSDD"] = outcome(
        "CoSDD", merge_split(scenario, trusting, mode=Mode.STOCHASTIC,
                             cache=sto_cache).structure, sto_cache)
    results["BCoSDD"] = outcome(
        "BCoSDD", merge_split(scenario, beliefs, mode=Mode.STOCHASTIC,
                              cache=sto_cache).structure, sto_cache)
    return results
