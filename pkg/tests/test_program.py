from fractions import Fraction

import pytest

from droneplan.model import Coalition, CostParams, Customer, Drone, Location, \
    build_scenario
from droneplan.program import AssignmentError, Mode, build_program

from conftest import cooperative_pair_scenario


def tiny_scenario():
    costs = CostParams(1, 30, 16, 16)
    customers = [Customer("c1", Location(1, 0), 1, 0, "p1")]
    drones = [Drone("d1", "p1", 5, 10, 150, 8, 30, Fraction(1, 10), 0)]
    return build_scenario([("p1", Location(0, 0))], customers, drones, costs)


def family_counts(program):
    return {k: len(v) for k, v in program.variables_by_family().items()}


def test_single_shipper_variable_counts():
    program = build_program(tiny_scenario(), Coalition(["p1"]), Mode.DETERMINISTIC)
    assert family_counts(program) == {
        "W": 1, "Y": 1, "Z": 1, "T": 1, "M": 1, "B": 1, "N": 1}


def test_stochastic_adds_auxiliaries():
    program = build_program(tiny_scenario(), Coalition(["p1"]), Mode.STOCHASTIC)
    counts = family_counts(program)
    assert counts["A"] == counts["X"] == counts["V"] == 1


def test_two_shipper_index_products(coop_pair):
    program = build_program(coop_pair, Coalition(["p1", "p2"]), Mode.STOCHASTIC)
    counts = family_counts(program)
    # 2 customers x 1 drone x 2 depots
    assert counts["Y"] == 4
    assert counts["M"] == 2 * 2 * 2
    assert counts["Z"] == 2 and counts["T"] == 2 and counts["B"] == 2
    assert counts["A"] == counts["X"] == counts["V"] == 2 * 1


def test_grand_coalition_y_product():
    costs = CostParams(1, 30, 16, 16)
    customers = [Customer(f"c{i}", Location(1, 0), 1, 0, "p1") for i in (1, 2)]
    drones = [Drone(f"d{i}", f"p{i}", 5, 10, 150, 8, 30, 0, 0) for i in (1, 2)]
    sc = build_scenario([("p1", Location(0, 0)), ("p2", Location(5, 0))],
                        customers, drones, costs)
    program = build_program(sc, Coalition(["p1", "p2"]), Mode.DETERMINISTIC)
    assert family_counts(program)["Y"] == 2 * 2 * 2


def test_deterministic_has_no_auxiliaries(coop_pair):
    program = build_program(coop_pair, Coalition(["p1", "p2"]), Mode.DETERMINISTIC)
    counts = family_counts(program)
    assert "A" not in counts and "X" not in counts and "V" not in counts


def test_unknown_shipper_rejected(coop_pair):
    with pytest.raises(AssignmentError, match="unknown shipper"):
        build_program(coop_pair, Coalition(["p9"]), Mode.DETERMINISTIC)


def test_constraint_checker_reports_violations(coop_pair):
    program = build_program(coop_pair, Coalition(["p1", "p2"]), Mode.DETERMINISTIC)
    # all-zero assignment violates allocation, owner dispatch and depot choice
    bad = program.check({})
    assert sorted(bad) == ["allocation[c1]", "allocation[c2]",
                           "owner_dispatch[c1,p2]", "owner_dispatch[c2,p1]",
                           "single_depot[d1]"]
    # outsourcing both customers is feasible
    good = program.check({"Z[c1]": Fraction(1), "Z[c2]": Fraction(1),
                          "B[d1,p1]": Fraction(1)})
    assert good == []
    # fractional binaries are flagged
    frac_vals = {"Z[c1]": Fraction(1, 2), "Z[c2]": Fraction(1),
                 "B[d1,p1]": Fraction(1)}
    assert any(v.startswith("integrality:Z[c1]") for v in program.check(frac_vals))
