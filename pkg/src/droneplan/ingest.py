"""Scenario input/output: Solomon benchmark files, synthesis, native JSON.

The native scenario format is JSON with top-level keys "v", "meta",
"shippers", "customers", "drones", "costs" and "beliefs".  All numeric values
are exact strings (terminating decimal or "num/den"), so a scenario survives
a round trip bit-exactly.

Solomon VRPTW files are parsed for their customer coordinates and demands;
time windows are carried along but play no role in the model.  Synthesis
turns a Solomon instance into a four-shipper scenario: four chosen rows
become depots, the remaining rows become customers assigned round-robin
(first customer to shipper 1, second to shipper 2, ...), each shipper gets
one drone with the standard benchmark parameters.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .coalition import BeliefMatrix
from .model import (CostParams, Customer, DeliveryScenario, Drone, Location,
                    Shipper, build_scenario)
from .numeric import NumberLike, frac, frac_str

SCHEMA_VERSION = 1

# standard synthesis defaults: one small drone per shipper, benchmark prices
DEFAULT_DRONE = dict(capacity=Fraction(5), trip_range=Fraction(10),
                     daily_range=Fraction(150), shift_hours=Fraction(8),
                     speed=Fraction(30), breakdown_prob=Fraction(1, 20),
                     initial_cost=Fraction(100))
DEFAULT_COSTS = dict(routing_rate=Fraction(1), transfer_cost=Fraction(30),
                     outsource_cost=Fraction(16), penalty_cost=Fraction(16))
DEFAULT_BELIEF = Fraction(9, 10)
DEFAULT_SERVICE_TIME = Fraction(1, 4)  # hours
DEFAULT_COORD_SCALE = Fraction(1, 10)  # Solomon units -> km
DEFAULT_WEIGHT_SCALE = Fraction(1, 10)  # Solomon demand -> kg, clamped to 5


class ParseError(Exception):
    pass


@dataclass(frozen=True)
class SolomonRow:
    id: int
    x: Fraction
    y: Fraction
    demand: Fraction
    ready_time: Fraction
    due_date: Fraction
    service_time: Fraction


@dataclass(frozen=True)
class SolomonInstance:
    name: str
    vehicle_count: int
    vehicle_capacity: Fraction
    rows: tuple[SolomonRow, ...]

    def row(self, row_id: int) -> SolomonRow:
        for r in self.rows:
            if r.id == row_id:
                return r
        raise KeyError(row_id)


def parse_solomon(text: str) -> SolomonInstance:
    """Parse the standard Solomon VRPTW layout (NAME / VEHICLE / CUSTOMER)."""
    lines = text.splitlines()
    name = None
    vehicle_count = None
    vehicle_capacity = None
    rows: list[SolomonRow] = []
    section = "name"
    expect_vehicle_numbers = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        upper = line.upper()
        if upper.startswith("VEHICLE"):
            section = "vehicle"
            expect_vehicle_numbers = False
            continue
        if upper.startswith("CUSTOMER"):
            section = "customer"
            continue
        if section == "name":
            if name is None:
                name = line
            continue
        if section == "vehicle":
            if upper.startswith("NUMBER"):
                expect_vehicle_numbers = True
                continue
            if expect_vehicle_numbers:
                parts = line.split()
                if len(parts) < 2:
                    raise ParseError(f"line {lineno}: malformed vehicle row {line!r}")
                try:
                    vehicle_count = int(parts[0])
                    vehicle_capacity = frac(parts[1])
                except ValueError as exc:
                    raise ParseError(f"line {lineno}: malformed vehicle row {line!r}") from exc
                expect_vehicle_numbers = False
            continue
        if section == "customer":
            if upper.startswith("CUST"):
                continue
            parts = line.split()
            if len(parts) != 7:
                raise ParseError(
                    f"line {lineno}: expected 7 columns in customer row, got {len(parts)}")
            try:
                rows.append(SolomonRow(int(parts[0]), *(frac(p) for p in parts[1:])))
            except ValueError as exc:
                raise ParseError(f"line {lineno}: malformed customer row {line!r}") from exc
    if name is None:
        raise ParseError("line 1: empty input, expected instance name")
    if vehicle_count is None or vehicle_capacity is None:
        raise ParseError("missing VEHICLE section")
    if not rows:
        raise ParseError("missing CUSTOMER rows")
    ids = [r.id for r in rows]
    if len(ids) != len(set(ids)):
        raise ParseError("duplicate customer row ids")
    for r in rows:
        if r.demand < 0:
            raise ParseError(f"row {r.id}: negative demand")
    return SolomonInstance(name, vehicle_count, vehicle_capacity, tuple(rows))


@dataclass(frozen=True)
class SynthesisConfig:
    depot_row_ids: tuple[int, ...] | None = None  # None = quadrant heuristic
    customer_count: int | None = None  # None = all remaining rows
    coord_scale: Fraction = DEFAULT_COORD_SCALE
    weight_scale: Fraction = DEFAULT_WEIGHT_SCALE
    service_time: Fraction = DEFAULT_SERVICE_TIME
    drone: Mapping[str, Fraction] = field(default_factory=lambda: dict(DEFAULT_DRONE))
    costs: Mapping[str, Fraction] = field(default_factory=lambda: dict(DEFAULT_COSTS))
    belief: Fraction = DEFAULT_BELIEF


def _quadrant_depots(rows: Sequence[SolomonRow]) -> tuple[int, ...]:
    """Pick the four rows nearest the centroids of the coordinate quadrants.

    The cloud is split at the mean point; each quadrant contributes the row
    nearest its own centroid (ties and empty quadrants fall back to the rows
    nearest the overall centroid).  Deterministic given the row list.
    """
    if len(rows) < 4:
        raise ParseError("need at least 4 rows to choose depots")
    cx = sum((r.x for r in rows), Fraction(0)) / len(rows)
    cy = sum((r.y for r in rows), Fraction(0)) / len(rows)
    quadrants: dict[tuple[bool, bool], list[SolomonRow]] = {}
    for r in rows:
        quadrants.setdefault((r.x >= cx, r.y >= cy), []).append(r)
    chosen: list[int] = []
    for key in sorted(quadrants):
        group = quadrants[key]
        qx = sum((r.x for r in group), Fraction(0)) / len(group)
        qy = sum((r.y for r in group), Fraction(0)) / len(group)
        best = min(group, key=lambda r: ((r.x - qx) ** 2 + (r.y - qy) ** 2, r.id))
        chosen.append(best.id)
    leftovers = sorted((((r.x - cx) ** 2 + (r.y - cy) ** 2, r.id)
                        for r in rows if r.id not in chosen))
    while len(chosen) < 4:
        chosen.append(leftovers.pop(0)[1])
    return tuple(chosen[:4])


def synthesize_scenario(inst: SolomonInstance,
                        cfg: SynthesisConfig = SynthesisConfig()) -> DeliveryScenario:
    """Build a four-shipper scenario from a Solomon instance.

    Row 0 (the original depot, demand zero) never becomes a customer.  The
    four depot rows are removed from the customer pool; the remaining rows,
    in file order, become customers c1, c2, ... owned round-robin by
    p1..p4 (customer index k belongs to shipper 1 + (k-1) mod 4).
    """
    candidates = [r for r in inst.rows if r.demand > 0]
    depot_ids = cfg.depot_row_ids
    if depot_ids is None:
        depot_ids = _quadrant_depots(candidates if len(candidates) >= 4 else inst.rows)
    depot_ids = tuple(depot_ids)
    if len(depot_ids) != 4 or len(set(depot_ids)) != 4:
        raise ParseError("exactly four distinct depot row ids are required")
    pool = [r for r in candidates if r.id not in depot_ids]
    count = cfg.customer_count if cfg.customer_count is not None else len(pool)
    if count > len(pool):
        raise ParseError(
            f"requested {count} customers but only {len(pool)} rows are available")
    pool = pool[:count]

    shippers = []
    drones = []
    for i, rid in enumerate(depot_ids, start=1):
        try:
            row = inst.row(rid)
        except KeyError:
            raise ParseError(f"unknown depot row id {rid}")
        shippers.append((f"p{i}", Location(row.x * cfg.coord_scale,
                                           row.y * cfg.coord_scale)))
        drones.append(Drone(f"d{i}", f"p{i}", **cfg.drone))
    customers = []
    for k, row in enumerate(pool, start=1):
        owner = f"p{1 + (k - 1) % 4}"
        weight = min(row.demand * cfg.weight_scale, Fraction(5))
        if weight <= 0:
            weight = Fraction(1, 10)
        customers.append(Customer(f"c{k}", Location(row.x * cfg.coord_scale,
                                                    row.y * cfg.coord_scale),
                                  weight, cfg.service_time, owner))
    return build_scenario(shippers, customers, drones, CostParams(**cfg.costs))


# --- native JSON ---------------------------------------------------------


@dataclass(frozen=True)
class ScenarioDocument:
    scenario: DeliveryScenario
    beliefs: BeliefMatrix
    meta: dict


def scenario_to_json(scenario: DeliveryScenario,
                     beliefs: BeliefMatrix | None = None,
                     meta: Mapping | None = None) -> str:
    if beliefs is None:
        beliefs = BeliefMatrix.uniform(scenario.shipper_ids(), DEFAULT_BELIEF)
    doc = {
        "v": SCHEMA_VERSION,
        "meta": dict(meta or {}),
        "shippers": [
            {"id": s.id,
             "depot": {"x": frac_str(s.depot.x), "y": frac_str(s.depot.y)}}
            for s in sorted(scenario.shippers, key=lambda s: s.id)],
        "customers": [
            {"id": c.id, "x": frac_str(c.location.x), "y": frac_str(c.location.y),
             "weight": frac_str(c.weight), "service_time": frac_str(c.service_time),
             "owner": c.owner}
            for c in sorted(scenario.customers, key=lambda c: c.id)],
        "drones": [
            {"id": d.id, "home": d.home_shipper,
             "capacity": frac_str(d.capacity), "trip_range": frac_str(d.trip_range),
             "daily_range": frac_str(d.daily_range),
             "shift_hours": frac_str(d.shift_hours), "speed": frac_str(d.speed),
             "breakdown_prob": frac_str(d.breakdown_prob),
             "initial_cost": frac_str(d.initial_cost)}
            for d in sorted(scenario.drones, key=lambda d: d.id)],
        "costs": {
            "routing_rate": frac_str(scenario.costs.routing_rate),
            "transfer_cost": frac_str(scenario.costs.transfer_cost),
            "outsource_cost": frac_str(scenario.costs.outsource_cost),
            "penalty_cost": frac_str(scenario.costs.penalty_cost),
            **({"big_m": scenario.costs.big_m}
               if scenario.costs.big_m is not None else {}),
        },
        "beliefs": {"pairs": [[p, q, frac_str(v)] for (p, q), v in beliefs.items()]},
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def scenario_from_json(text: str) -> ScenarioDocument:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("v") != SCHEMA_VERSION:
        raise ParseError(f"unsupported scenario schema version {doc.get('v')!r}")
    try:
        shippers = [(s["id"], Location(frac(s["depot"]["x"]), frac(s["depot"]["y"])))
                    for s in doc["shippers"]]
        customers = [Customer(c["id"], Location(frac(c["x"]), frac(c["y"])),
                              frac(c["weight"]), frac(c["service_time"]), c["owner"])
                     for c in doc["customers"]]
        drones = [Drone(d["id"], d["home"], frac(d["capacity"]), frac(d["trip_range"]),
                        frac(d["daily_range"]), frac(d["shift_hours"]), frac(d["speed"]),
                        frac(d["breakdown_prob"]), frac(d["initial_cost"]))
                  for d in doc["drones"]]
        cj = doc["costs"]
        costs = CostParams(frac(cj["routing_rate"]), frac(cj["transfer_cost"]),
                           frac(cj["outsource_cost"]), frac(cj["penalty_cost"]),
                           big_m=cj.get("big_m"))
        pairs = {(p, q): frac(v) for p, q, v in doc.get("beliefs", {}).get("pairs", [])}
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed scenario document: {exc}") from exc
    scenario = build_scenario(shippers, customers, drones, costs)
    sids = scenario.shipper_ids()
    if not pairs:
        beliefs = BeliefMatrix.uniform(sids, DEFAULT_BELIEF)
    else:
        beliefs = BeliefMatrix(pairs)
    return ScenarioDocument(scenario, beliefs, dict(doc.get("meta", {})))


def load_scenario(path: str) -> ScenarioDocument:
    with open(path, "r", encoding="utf-8") as fh:
        return scenario_from_json(fh.read())
