from fractions import Fraction

import pytest

from droneplan.coalition import BeliefMatrix
from droneplan.ingest import (ParseError, SynthesisConfig, parse_solomon,
                              scenario_from_json, scenario_to_json,
                              synthesize_scenario)
from droneplan.model import validate_scenario

from conftest import cooperative_pair_scenario, trust_stake_scenario

HEADER = """TOY1

VEHICLE
NUMBER     CAPACITY
  25         200

CUSTOMER
CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE   TIME
"""


def solomon_text(n_rows: int) -> str:
    lines = [HEADER, "    0      40         50          0          0       1236          0"]
    for i in range(1, n_rows):
        x = 10 + (i * 7) % 80
        y = 5 + (i * 13) % 90
        demand = 10 + (i % 4) * 10
        lines.append(f"   {i}      {x}         {y}         {demand}"
                     f"        {i * 3}        {i * 3 + 50}         90")
    return "\n".join(lines) + "\n"


def test_parse_counts_rows():
    inst = parse_solomon(solomon_text(101))
    assert len(inst.rows) == 101  # depot row 0 plus 100 customers
    assert inst.name == "TOY1"
    assert inst.vehicle_count == 25
    assert inst.vehicle_capacity == 200
    assert inst.row(0).demand == 0


def test_parse_errors_name_offending_line():
    with pytest.raises(ParseError, match="line 1"):
        parse_solomon("")
    bad = solomon_text(5).replace("40         50", "40         fifty")
    with pytest.raises(ParseError, match="line \\d+"):
        parse_solomon(bad)
    with pytest.raises(ParseError, match="VEHICLE"):
        parse_solomon("NAME\n\nCUSTOMER\nCUST NO.\n 0 1 1 0 0 5 0\n")


def test_synthesis_round_robin_ownership():
    inst = parse_solomon(solomon_text(70))
    cfg = SynthesisConfig(depot_row_ids=(10, 20, 30, 40), customer_count=60)
    sc = synthesize_scenario(inst, cfg)
    assert validate_scenario(sc) == []
    assert len(sc.shippers) == 4
    assert len(sc.customers) == 60
    owner = {c.id: c.owner for c in sc.customers}
    assert owner["c1"] == "p1" and owner["c2"] == "p2"
    assert owner["c3"] == "p3" and owner["c4"] == "p4"
    assert owner["c5"] == "p1"
    per = {p: sum(1 for c in sc.customers if c.owner == p)
           for p in ("p1", "p2", "p3", "p4")}
    assert per == {"p1": 15, "p2": 15, "p3": 15, "p4": 15}


def test_synthesis_defaults_match_benchmark_parameters():
    inst = parse_solomon(solomon_text(30))
    sc = synthesize_scenario(inst, SynthesisConfig(depot_row_ids=(1, 2, 3, 4),
                                                   customer_count=8))
    d = sc.drones[0]
    assert (d.capacity, d.trip_range, d.daily_range, d.shift_hours, d.speed) \
        == (5, 10, 150, 8, 30)
    assert d.initial_cost == 100
    assert (sc.costs.transfer_cost, sc.costs.outsource_cost,
            sc.costs.penalty_cost) == (30, 16, 16)
    assert all(c.weight <= 5 for c in sc.customers)
    assert all(c.service_time == Fraction(1, 4) for c in sc.customers)


def test_synthesis_balance_when_not_divisible():
    inst = parse_solomon(solomon_text(30))
    sc = synthesize_scenario(inst, SynthesisConfig(depot_row_ids=(1, 2, 3, 4),
                                                   customer_count=10))
    per = sorted(sum(1 for c in sc.customers if c.owner == p)
                 for p in ("p1", "p2", "p3", "p4"))
    assert max(per) - min(per) <= 1


def test_synthesis_empty_customer_set_is_valid():
    inst = parse_solomon(solomon_text(12))
    sc = synthesize_scenario(inst, SynthesisConfig(depot_row_ids=(1, 2, 3, 4),
                                                   customer_count=0))
    assert validate_scenario(sc) == []
    assert sc.customers == ()


def test_synthesis_depot_errors():
    inst = parse_solomon(solomon_text(12))
    with pytest.raises(ParseError, match="distinct"):
        synthesize_scenario(inst, SynthesisConfig(depot_row_ids=(1, 1, 2, 3)))
    with pytest.raises(ParseError, match="unknown depot row"):
        synthesize_scenario(inst, SynthesisConfig(depot_row_ids=(1, 2, 3, 999)))
    with pytest.raises(ParseError, match="only"):
        synthesize_scenario(inst, SynthesisConfig(depot_row_ids=(1, 2, 3, 4),
                                                  customer_count=50))


def test_quadrant_depot_heuristic_is_deterministic():
    inst = parse_solomon(solomon_text(40))
    a = synthesize_scenario(inst, SynthesisConfig(customer_count=12))
    b = synthesize_scenario(inst, SynthesisConfig(customer_count=12))
    assert a.fingerprint() == b.fingerprint()
    assert validate_scenario(a) == []


@pytest.mark.parametrize("scenario", [cooperative_pair_scenario(),
                                      trust_stake_scenario()])
def test_json_round_trip_is_identity(scenario):
    beliefs = BeliefMatrix.uniform([s.id for s in scenario.shippers],
                                   Fraction(17, 20))
    text = scenario_to_json(scenario, beliefs, meta={"note": "round trip"})
    doc = scenario_from_json(text)
    assert doc.scenario == scenario
    assert doc.beliefs == beliefs
    assert doc.meta == {"note": "round trip"}
    assert scenario_to_json(doc.scenario, doc.beliefs, doc.meta) == text


def test_json_round_trip_synthesized():
    inst = parse_solomon(solomon_text(30))
    sc = synthesize_scenario(inst, SynthesisConfig(depot_row_ids=(1, 2, 3, 4),
                                                   customer_count=9))
    text = scenario_to_json(sc)
    assert scenario_from_json(text).scenario == sc


def test_json_rejects_bad_documents():
    with pytest.raises(ParseError, match="invalid JSON"):
        scenario_from_json("{nope")
    with pytest.raises(ParseError, match="schema version"):
        scenario_from_json('{"v": 99}')
    with pytest.raises(ParseError, match="malformed"):
        scenario_from_json('{"v": 1, "shippers": [{"id": "p1"}], '
                           '"customers": [], "drones": [], "costs": {}}')
