import random
from fractions import Fraction

import pytest

from droneplan.coalition import BeliefMatrix
from droneplan.costshare import CharacteristicCache, shapley
from droneplan.model import (Coalition, CoalitionStructure, CostParams,
                             Customer, Drone, Location, build_scenario)
from droneplan.penalty import expected_penalty
from droneplan.program import Mode
from droneplan.sim import SimConfig, compare_frameworks, simulate_plan
from droneplan.solver import solve_assignment

from conftest import cooperative_pair_scenario, single_drone_line


def solved(scenario, structure, mode=Mode.STOCHASTIC):
    cache = CharacteristicCache(scenario, mode)
    return cache, {c: cache.solution(c) for c in structure}


def test_no_randomness_reproduces_plan_exactly(coop_pair):
    structure = CoalitionStructure([Coalition(["p1", "p2"])])
    cache, solutions = solved(coop_pair, structure, Mode.DETERMINISTIC)
    report = simulate_plan(coop_pair, structure, solutions,
                           SimConfig(runs=7, seed=1), cache=cache)
    planned = solutions[structure.coalitions[0]].objective
    assert report.total_mean == planned
    assert report.mean_penalty == 0
    alloc = shapley(cache, coop_pair, structure.coalitions[0])
    assert report.per_shipper_mean == alloc.shares
    assert report.delivered_count == report.assigned_count


def test_certain_breakdown_forfeits_all_packages():
    sc = single_drone_line(3, breakdown=Fraction(1), penalty=Fraction(16))
    structure = CoalitionStructure.grand(["p1"])
    # force the drone plan: with breakdown certain the optimizer would rather
    # outsource, so plan deterministically and execute stochastically
    cache, solutions = solved(sc, structure, Mode.DETERMINISTIC)
    report = simulate_plan(sc, structure, solutions,
                           SimConfig(runs=20, seed=4), cache=cache)
    assert report.mean_penalty == 3 * 16
    assert report.delivered_count == 0
    events = simulate_plan(sc, structure, solutions,
                           SimConfig(runs=3, seed=4), cache=cache,
                           keep_events=True).events
    assert all(e.drone_failures.get("d1") == 0 for e in events)


def test_monte_carlo_penalty_matches_closed_form():
    p, n, cpen = Fraction(1, 10), 3, Fraction(16)
    sc = single_drone_line(n, breakdown=p, penalty=cpen)
    structure = CoalitionStructure.grand(["p1"])
    cache, solutions = solved(sc, structure, Mode.DETERMINISTIC)
    assert solutions[structure.coalitions[0]].served_count["d1"] == n
    report = simulate_plan(sc, structure, solutions,
                           SimConfig(runs=100_000, seed=12), cache=cache)
    expect = expected_penalty(n, p, cpen)
    assert abs(report.mean_penalty - expect) <= Fraction(2, 100) * expect


def test_seeded_determinism_bit_identical(coop_pair):
    structure = CoalitionStructure([Coalition(["p1", "p2"])])
    cache, solutions = solved(coop_pair, structure)
    cfg = SimConfig(runs=500, seed=9, misbehavior={"p1": Fraction(1, 4)})
    a = simulate_plan(coop_pair, structure, solutions, cfg, cache=cache,
                      keep_samples=True)
    b = simulate_plan(coop_pair, structure, solutions, cfg, cache=cache,
                      keep_samples=True)
    assert a == b
    c = simulate_plan(coop_pair, structure, solutions,
                      SimConfig(runs=500, seed=10,
                                misbehavior={"p1": Fraction(1, 4)}),
                      cache=cache, keep_samples=True)
    assert c != a


def test_misbehavior_charges_package_owner():
    # p2's package is delivered by p1; p1 drops every transferred package
    sc = cooperative_pair_scenario()
    structure = CoalitionStructure([Coalition(["p1", "p2"])])
    cache, solutions = solved(sc, structure)
    cfg = SimConfig(runs=11, seed=2, misbehavior={"p1": Fraction(1)})
    report = simulate_plan(sc, structure, solutions, cfg, cache=cache)
    alloc = shapley(cache, sc, structure.coalitions[0])
    # c1 (owned by p2) fails every run; its penalty lands on p2 alone
    assert report.per_shipper_mean["p2"] == alloc.shares["p2"] + 16
    assert report.per_shipper_mean["p1"] == alloc.shares["p1"]
    assert report.delivered_count == report.runs  # only p1's own c2 flies


def test_event_log_reconciles_costs():
    sc = single_drone_line(4, breakdown=Fraction(1, 3), penalty=Fraction(10))
    structure = CoalitionStructure.grand(["p1"])
    cache, solutions = solved(sc, structure, Mode.DETERMINISTIC)
    report = simulate_plan(sc, structure, solutions,
                           SimConfig(runs=40, seed=21), cache=cache,
                           keep_events=True, keep_samples=True)
    sol = solutions[structure.coalitions[0]]
    leg = {c.id: 2 * sc.costs.routing_rate *
           Fraction(abs(float(((c.location.x) ** 2 + c.location.y ** 2))) ** 0.5)
           for c in sc.customers}
    total = Fraction(0)
    for event in report.events:
        flown_cost = sum((leg[c] for c in event.flown_packages), Fraction(0))
        penalties = sc.costs.penalty_cost * len(event.failed_packages)
        assert event.total_cost == flown_cost + penalties
        total += event.total_cost
    assert total / report.runs == report.total_mean


def test_compare_frameworks_no_uncertainty_coincides(coop_pair):
    cfg = SimConfig(runs=30, seed=5)
    outcomes = compare_frameworks(coop_pair, cfg,
                                  BeliefMatrix.all_good(["p1", "p2"]))
    assert set(outcomes) == {"DDD", "SDD", "CoDDD", "CoSDD", "BCoSDD"}
    # no breakdown risk anywhere: DDD == SDD and CoDDD == CoSDD == BCoSDD
    assert outcomes["DDD"].report.per_shipper_mean \
        == outcomes["SDD"].report.per_shipper_mean
    assert outcomes["CoDDD"].report.per_shipper_mean \
        == outcomes["CoSDD"].report.per_shipper_mean \
        == outcomes["BCoSDD"].report.per_shipper_mean
    # singleton frameworks use singleton solves
    singles = CoalitionStructure.singletons(["p1", "p2"])
    assert outcomes["DDD"].structure == singles
    for sid in ("p1", "p2"):
        assert outcomes["DDD"].report.per_shipper_mean[sid] == solve_assignment(
            coop_pair, Coalition([sid]), Mode.DETERMINISTIC).objective
    # cooperation saves money here
    assert outcomes["CoSDD"].report.total_mean \
        < outcomes["SDD"].report.total_mean


def mutual_distrust_scenario():
    """Each shipper's far customer sits next to the other's depot.

    Trusting cooperation swaps the packages; each shipper then stakes one
    package (penalty 100) on a partner that drops half of what it receives,
    which dwarfs the cooperation saving, so belief-aware planning refuses.
    """
    costs = CostParams(1, 1, 16, 100)
    shippers = [("p1", Location(0, 0)), ("p2", Location(30, 0))]
    customers = [Customer("c1", Location(1, 0), 1, 0, "p2"),
                 Customer("c2", Location(29, 0), 1, 0, "p1")]
    drones = [Drone("d1", "p1", 5, 10, 150, 8, 30, 0, 0),
              Drone("d2", "p2", 5, 10, 150, 8, 30, 0, 0)]
    return build_scenario(shippers, customers, drones, costs)


def test_bayesian_cooperation_avoids_bad_partners():
    sc = mutual_distrust_scenario()
    beliefs = BeliefMatrix.uniform(["p1", "p2"], Fraction(1, 2))
    cfg = SimConfig(runs=4000, seed=13,
                    misbehavior={"p1": Fraction(1, 2), "p2": Fraction(1, 2)})
    outcomes = compare_frameworks(sc, cfg, beliefs)
    # trusting cooperation swaps the packages between the unreliable partners
    assert outcomes["CoSDD"].structure.label() == "p1,p2"
    sol = outcomes["CoSDD"].report
    # belief-aware planning refuses: expected stake 0.25*100 > saving of 13
    assert outcomes["BCoSDD"].structure.label() == "p1|p2"
    for sid in ("p1", "p2"):
        assert outcomes["BCoSDD"].report.per_shipper_mean[sid] \
            <= outcomes["CoSDD"].report.per_shipper_mean[sid]


def test_structure_solution_mismatch_rejected(coop_pair):
    structure = CoalitionStructure([Coalition(["p1", "p2"])])
    _, solutions = solved(coop_pair, structure)
    wrong = CoalitionStructure.singletons(["p1", "p2"])
    with pytest.raises(ValueError, match="do not match"):
        simulate_plan(coop_pair, wrong, solutions, SimConfig(runs=2, seed=0))
