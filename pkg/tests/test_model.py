import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from droneplan.model import (Coalition, CoalitionStructure, CostParams, Customer,
                             Drone, Location, all_structures, bell_number,
                             build_scenario, distance, parse_structure,
                             validate_scenario)

from conftest import cooperative_pair_scenario, random_scenario

coords = st.integers(min_value=-10**6, max_value=10**6).map(
    lambda n: Fraction(n, 16))


def loc(x, y):
    return Location(x, y)


def test_distance_examples():
    assert distance(loc(0, 0), loc(0, 0)) == 0
    assert distance(loc(0, 0), loc(3, 4)) == 5
    assert distance(loc(-1, -1), loc(2, 3)) == 5


@given(st.tuples(coords, coords), st.tuples(coords, coords))
def test_distance_symmetry_and_sign(a, b):
    pa, pb = loc(*a), loc(*b)
    assert distance(pa, pb) == distance(pb, pa)
    assert distance(pa, pb) >= 0
    assert (distance(pa, pb) == 0) == (pa == pb)


@given(st.tuples(coords, coords), st.tuples(coords, coords),
       st.tuples(coords, coords))
def test_distance_triangle_inequality(a, b, c):
    pa, pb, pc = loc(*a), loc(*b), loc(*c)
    slack = Fraction(1, 10**9) * (1 + distance(pa, pc))
    assert distance(pa, pb) + distance(pb, pc) >= distance(pa, pc) - slack


def test_validate_clean_scenario():
    assert validate_scenario(cooperative_pair_scenario()) == []


def test_validate_flags_bad_weight_and_owner():
    costs = CostParams(1, 1, 1, 1)
    customers = [Customer("c1", loc(0, 0), 0, 0, "p1"),
                 Customer("c2", loc(0, 0), 1, 0, "nobody")]
    sc = build_scenario([("p1", loc(0, 0))], customers, [], costs)
    report = validate_scenario(sc)
    assert any("weight must be positive" in r for r in report)
    assert any("unresolved owner" in r for r in report)


def test_validate_flags_drone_and_cost_problems():
    costs = CostParams(1, 1, 1, 1, big_m=1)
    drones = [Drone("d1", "p1", 5, 0, 10, 8, 30, 2, -1)]
    customers = [Customer(f"c{i}", loc(0, 0), 1, 0, "p1") for i in range(3)]
    sc = build_scenario([("p1", loc(0, 0))], customers, drones, costs)
    report = validate_scenario(sc)
    assert any("trip_range must be positive" in r for r in report)
    assert any("breakdown_prob" in r for r in report)
    assert any("initial_cost" in r for r in report)
    assert any("big_m" in r for r in report)


def test_coalition_basics():
    c = Coalition(["p2", "p1", "p2"])
    assert c.members == ("p1", "p2")
    assert c.label() == "p1,p2"
    assert c.without("p1").members == ("p2",)
    with pytest.raises(ValueError):
        Coalition([])


def test_structure_partition_enforced():
    with pytest.raises(ValueError):
        CoalitionStructure([Coalition(["p1", "p2"]), Coalition(["p2"])])


def test_partition_property_random():
    rng = random.Random(5)
    for _ in range(20):
        n = rng.randint(1, 5)
        ids = [f"p{i}" for i in range(1, n + 1)]
        for structure in all_structures(ids):
            seen = sorted(m for block in structure for m in block)
            assert seen == sorted(ids)


@pytest.mark.parametrize("n,count", [(1, 1), (2, 2), (3, 5), (4, 15), (5, 52)])
def test_bell_counts(n, count):
    ids = [f"p{i}" for i in range(1, n + 1)]
    assert len(all_structures(ids)) == count
    assert bell_number(n) == count
    assert len({s.label() for s in all_structures(ids)}) == count


def test_structure_grammar_round_trip():
    s = parse_structure("p3,p1|p2|p4")
    assert s.label() == "p1,p3|p2|p4"
    assert parse_structure(s.label()) == s
    with pytest.raises(ValueError):
        parse_structure("p1||p2")
    with pytest.raises(ValueError):
        parse_structure("")


def test_scenario_fingerprint_changes_with_content():
    a = cooperative_pair_scenario()
    b = cooperative_pair_scenario(transfer_cost=4)
    assert a.fingerprint() == cooperative_pair_scenario().fingerprint()
    assert a.fingerprint() != b.fingerprint()


def test_random_scenarios_validate():
    rng = random.Random(11)
    for _ in range(25):
        sc = random_scenario(rng, rng.randint(1, 4), rng.randint(0, 6),
                             rng.randint(1, 3))
        assert validate_scenario(sc) == []
