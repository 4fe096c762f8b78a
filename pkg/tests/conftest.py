import random
from fractions import Fraction

import pytest

from droneplan.model import (Coalition, CostParams, Customer, DeliveryScenario,
                             Drone, Location, build_scenario)


def rational(rng: random.Random, lo: float, hi: float, denom: int = 4) -> Fraction:
    return Fraction(rng.randint(int(lo * denom), int(hi * denom)), denom)


def random_scenario(rng: random.Random, n_shippers: int, n_customers: int,
                    n_drones: int, identical_drones: bool = False,
                    spread: float = 6.0) -> DeliveryScenario:
    """Small random instance with rational-friendly parameters.

    Mixes tight and loose ranges/budgets so that outsourcing, cooperation and
    load splitting all occur across draws.
    """
    shippers = [(f"p{i + 1}", Location(rational(rng, -spread, spread),
                                       rational(rng, -spread, spread)))
                for i in range(n_shippers)]
    sids = [sid for sid, _ in shippers]
    customers = [
        Customer(f"c{j + 1}",
                 Location(rational(rng, -spread - 1, spread + 1),
                          rational(rng, -spread - 1, spread + 1)),
                 rational(rng, 1, 5), Fraction(rng.choice([0, 1, 2]), 4),
                 rng.choice(sids))
        for j in range(n_customers)]
    if identical_drones:
        spec = (5, rng.choice([6, 10, 16]), rng.choice([12, 30, 80]),
                rng.choice([2, 4, 8]), 30, Fraction(rng.randint(0, 4), 10),
                rng.choice([0, 5]))
        drones = [Drone(f"d{k + 1}", rng.choice(sids), *spec)
                  for k in range(n_drones)]
    else:
        drones = [Drone(f"d{k + 1}", rng.choice(sids), rng.choice([3, 5]),
                        rng.choice([4, 8, 14]), rng.choice([10, 20, 60]),
                        rng.choice([1, 2, 8]), rng.choice([10, 30]),
                        Fraction(rng.randint(0, 10), 10), rng.choice([0, 2, 50]))
                  for k in range(n_drones)]
    costs = CostParams(Fraction(rng.randint(1, 4), 2), rng.choice([0, 3, 30]),
                       rng.choice([4, 16]), rng.choice([0, 8, 16]))
    return build_scenario(shippers, customers, drones, costs)


def cooperative_pair_scenario(transfer_cost=3) -> DeliveryScenario:
    """p2 owns a customer only p1's drone can serve; cooperation saves money."""
    costs = CostParams(1, transfer_cost, 16, 16)
    shippers = [("p1", Location(0, 0)), ("p2", Location(20, 0))]
    customers = [
        Customer("c1", Location(1, 0), 1, 0, "p2"),  # near p1's depot
        Customer("c2", Location(0, 1), 1, 0, "p1"),
    ]
    drones = [Drone("d1", "p1", 5, 10, 150, 8, 30, 0, 0)]
    return build_scenario(shippers, customers, drones, costs)


def trust_stake_scenario() -> DeliveryScenario:
    """Four shippers; p1/p2 own packages only p3/p4 can deliver.

    Breakdown probability is zero and the per-package penalty is large, so the
    assignment objective ignores it while the Bayesian payoff treats it as the
    stake lost to a misbehaving partner.  Used for the dynamic-game tests.
    """
    costs = CostParams(1, 6, 16, 300)
    shippers = [("p1", Location(50, 0)), ("p2", Location(150, 0)),
                ("p3", Location(0, 0)), ("p4", Location(100, 0))]
    customers = [
        Customer("c11", Location("0.5", 0), 1, 0, "p1"),
        Customer("c12", Location(0, "0.5"), 1, 0, "p1"),
        Customer("c13", Location("-0.5", 0), 1, 0, "p1"),
        Customer("c21", Location("100.5", 0), 1, 0, "p2"),
        Customer("c22", Location(100, "0.5"), 1, 0, "p2"),
        Customer("c23", Location("99.5", 0), 1, 0, "p2"),
        Customer("c31", Location(0, "-0.5"), 1, 0, "p3"),
        Customer("c41", Location(100, "-0.5"), 1, 0, "p4"),
    ]
    drones = [Drone("d3", "p3", 5, 2, 50, 8, 30, 0, 0),
              Drone("d4", "p4", 5, 2, 50, 8, 30, 0, 0)]
    return build_scenario(shippers, customers, drones, costs)


def single_drone_line(n: int, breakdown: Fraction, penalty: Fraction,
                      outsource: Fraction = Fraction(1000)) -> DeliveryScenario:
    """One shipper, one drone, n customers 1 km out; outsourcing priced out."""
    costs = CostParams(1, 0, outsource, penalty)
    customers = [Customer(f"c{j + 1}", Location(1, j), 1, 0, "p1")
                 for j in range(n)]
    drones = [Drone("d1", "p1", 5, 50, 10000, 10000, 30, breakdown, 0)]
    return build_scenario([("p1", Location(0, 0))], customers, drones, costs)


@pytest.fixture
def coop_pair():
    return cooperative_pair_scenario()


@pytest.fixture
def trust_stake():
    return trust_stake_scenario()
