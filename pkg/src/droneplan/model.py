"""Core domain model: shippers, drones, customers, scenarios, coalitions.

Everything is immutable after construction and safe to share across workers.
Coordinates are planar kilometres; weights are kilograms; durations are hours;
money is exact rationals (see numeric.frac).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .numeric import NumberLike, frac, frac_str


@dataclass(frozen=True)
class Location:
    x: Fraction
    y: Fraction

    def __init__(self, x: NumberLike, y: NumberLike) -> None:
        object.__setattr__(self, "x", frac(x))
        object.__setattr__(self, "y", frac(y))


def distance(a: Location, b: Location) -> Fraction:
    """Euclidean distance, lifted to an exact rational.

    The hypotenuse is computed in IEEE double precision (correctly rounded)
    and then converted to its exact binary rational, so every downstream cost
    comparison is exact and repeated runs are bit-identical.  Distance is
    symmetric, non-negative and zero only for identical locations.
    """
    if a == b:
        return Fraction(0)
    dx = float(a.x - b.x)
    dy = float(a.y - b.y)
    return Fraction(math.hypot(dx, dy))


@dataclass(frozen=True)
class Customer:
    id: str
    location: Location
    weight: Fraction  # kilograms, one package per customer
    service_time: Fraction  # hours spent searching and dropping
    owner: str  # shipper id

    def __init__(self, id: str, location: Location, weight: NumberLike,
                 service_time: NumberLike, owner: str) -> None:
        object.__setattr__(self, "id", id)
        object.__setattr__(self, "location", location)
        object.__setattr__(self, "weight", frac(weight))
        object.__setattr__(self, "service_time", frac(service_time))
        object.__setattr__(self, "owner", owner)


@dataclass(frozen=True)
class Drone:
    id: str
    home_shipper: str
    capacity: Fraction  # kg per trip
    trip_range: Fraction  # km per trip (round trip)
    daily_range: Fraction  # km per day
    shift_hours: Fraction  # hours per day
    speed: Fraction  # km/h
    breakdown_prob: Fraction  # probability of breaking before a delivery
    initial_cost: Fraction  # paid once if the drone is used at all

    def __init__(self, id: str, home_shipper: str, capacity: NumberLike,
                 trip_range: NumberLike, daily_range: NumberLike,
                 shift_hours: NumberLike, speed: NumberLike,
                 breakdown_prob: NumberLike, initial_cost: NumberLike) -> None:
        object.__setattr__(self, "id", id)
        object.__setattr__(self, "home_shipper", home_shipper)
        object.__setattr__(self, "capacity", frac(capacity))
        object.__setattr__(self, "trip_range", frac(trip_range))
        object.__setattr__(self, "daily_range", frac(daily_range))
        object.__setattr__(self, "shift_hours", frac(shift_hours))
        object.__setattr__(self, "speed", frac(speed))
        object.__setattr__(self, "breakdown_prob", frac(breakdown_prob))
        object.__setattr__(self, "initial_cost", frac(initial_cost))


@dataclass(frozen=True)
class Shipper:
    id: str
    depot: Location
    drones: frozenset[str] = frozenset()
    customers: frozenset[str] = frozenset()

    def __init__(self, id: str, depot: Location,
                 drones: Iterable[str] = (), customers: Iterable[str] = ()) -> None:
        object.__setattr__(self, "id", id)
        object.__setattr__(self, "depot", depot)
        object.__setattr__(self, "drones", frozenset(drones))
        object.__setattr__(self, "customers", frozenset(customers))


@dataclass(frozen=True)
class CostParams:
    routing_rate: Fraction  # currency per km flown
    transfer_cost: Fraction  # currency per shipper that transfers at all
    outsource_cost: Fraction  # currency per package given to the carrier
    penalty_cost: Fraction  # currency per undelivered package
    big_m: int | None = None  # optional override; None = tight per-constraint constants

    def __init__(self, routing_rate: NumberLike, transfer_cost: NumberLike,
                 outsource_cost: NumberLike, penalty_cost: NumberLike,
                 big_m: int | None = None) -> None:
        object.__setattr__(self, "routing_rate", frac(routing_rate))
        object.__setattr__(self, "transfer_cost", frac(transfer_cost))
        object.__setattr__(self, "outsource_cost", frac(outsource_cost))
        object.__setattr__(self, "penalty_cost", frac(penalty_cost))
        object.__setattr__(self, "big_m", big_m)


class _Lookup:
    """Cached by-id maps for a scenario (kept out of the frozen dataclass)."""

    def __init__(self, scenario: "DeliveryScenario") -> None:
        self.shippers = {s.id: s for s in scenario.shippers}
        self.customers = {c.id: c for c in scenario.customers}
        self.drones = {d.id: d for d in scenario.drones}


@dataclass(frozen=True)
class DeliveryScenario:
    shippers: tuple[Shipper, ...]
    customers: tuple[Customer, ...]
    drones: tuple[Drone, ...]
    costs: CostParams

    def __init__(self, shippers: Sequence[Shipper], customers: Sequence[Customer],
                 drones: Sequence[Drone], costs: CostParams) -> None:
        object.__setattr__(self, "shippers", tuple(shippers))
        object.__setattr__(self, "customers", tuple(customers))
        object.__setattr__(self, "drones", tuple(drones))
        object.__setattr__(self, "costs", costs)

    @property
    def _lookup(self) -> _Lookup:
        lk = self.__dict__.get("_lk")
        if lk is None:
            lk = _Lookup(self)
            self.__dict__["_lk"] = lk
        return lk

    def shipper(self, sid: str) -> Shipper:
        return self._lookup.shippers[sid]

    def customer(self, cid: str) -> Customer:
        return self._lookup.customers[cid]

    def drone(self, did: str) -> Drone:
        return self._lookup.drones[did]

    def shipper_ids(self) -> tuple[str, ...]:
        return tuple(sorted(s.id for s in self.shippers))

    def customers_of(self, shipper_ids: Iterable[str]) -> tuple[Customer, ...]:
        wanted = set(shipper_ids)
        return tuple(c for c in sorted(self.customers, key=lambda c: c.id)
                     if c.owner in wanted)

    def drones_of(self, shipper_ids: Iterable[str]) -> tuple[Drone, ...]:
        wanted = set(shipper_ids)
        return tuple(d for d in sorted(self.drones, key=lambda d: d.id)
                     if d.home_shipper in wanted)

    def fingerprint(self) -> str:
        """Stable content hash used to key characteristic caches."""
        parts: list[str] = []
        for s in sorted(self.shippers, key=lambda s: s.id):
            parts.append(f"S|{s.id}|{frac_str(s.depot.x)}|{frac_str(s.depot.y)}")
        for c in sorted(self.customers, key=lambda c: c.id):
            parts.append("C|" + "|".join(
                [c.id, frac_str(c.location.x), frac_str(c.location.y),
                 frac_str(c.weight), frac_str(c.service_time), c.owner]))
        for d in sorted(self.drones, key=lambda d: d.id):
            parts.append("D|" + "|".join(
                [d.id, d.home_shipper] + [frac_str(v) for v in (
                    d.capacity, d.trip_range, d.daily_range, d.shift_hours,
                    d.speed, d.breakdown_prob, d.initial_cost)]))
        cp = self.costs
        parts.append("P|" + "|".join(frac_str(v) for v in (
            cp.routing_rate, cp.transfer_cost, cp.outsource_cost, cp.penalty_cost)))
        parts.append(f"M|{cp.big_m}")
        return hashlib.sha256("\n".join(parts).encode()).hexdigest()


def validate_scenario(scenario: DeliveryScenario) -> list[str]:
    """Return a list of invariant violations (empty list = valid).

    Violations are data, not exceptions: callers decide how to react.
    """
    report: list[str] = []
    shipper_ids = [s.id for s in scenario.shippers]
    sid_set = set(shipper_ids)
    if len(shipper_ids) != len(sid_set):
        report.append("duplicate shipper id")

    def finite(x: Fraction) -> bool:
        return isinstance(x, Fraction)

    for s in scenario.shippers:
        if not (finite(s.depot.x) and finite(s.depot.y)):
            report.append(f"shipper {s.id}: depot coordinates must be finite")

    cust_ids = [c.id for c in scenario.customers]
    if len(cust_ids) != len(set(cust_ids)):
        report.append("duplicate customer id")
    for c in scenario.customers:
        if c.weight <= 0:
            report.append(f"customer {c.id}: weight must be positive")
        if c.service_time < 0:
            report.append(f"customer {c.id}: service_time must be non-negative")
        if c.owner not in sid_set:
            report.append(f"customer {c.id}: unresolved owner shipper {c.owner!r}")

    drone_ids = [d.id for d in scenario.drones]
    if len(drone_ids) != len(set(drone_ids)):
        report.append("duplicate drone id")
    for d in scenario.drones:
        for name in ("capacity", "trip_range", "daily_range", "shift_hours", "speed"):
            if getattr(d, name) <= 0:
                report.append(f"drone {d.id}: {name} must be positive")
        if not (0 <= d.breakdown_prob <= 1):
            report.append(f"drone {d.id}: breakdown_prob must be in [0, 1]")
        if d.initial_cost < 0:
            report.append(f"drone {d.id}: initial_cost must be non-negative")
        if d.home_shipper not in sid_set:
            report.append(f"drone {d.id}: unresolved home shipper {d.home_shipper!r}")

    cp = scenario.costs
    for name in ("routing_rate", "transfer_cost", "outsource_cost", "penalty_cost"):
        if getattr(cp, name) < 0:
            report.append(f"costs: {name} must be non-negative")
    if cp.big_m is not None:
        least = len(scenario.customers) * len(scenario.drones) * len(scenario.shippers)
        if cp.big_m < least:
            report.append(f"costs: big_m must be at least |C|*|D|*|P| = {least}")

    # shipper membership sets must mirror the ownership fields exactly
    for s in scenario.shippers:
        owned_c = {c.id for c in scenario.customers if c.owner == s.id}
        if s.customers != owned_c:
            report.append(f"shipper {s.id}: customer set does not match customer owners")
        owned_d = {d.id for d in scenario.drones if d.home_shipper == s.id}
        if s.drones != owned_d:
            report.append(f"shipper {s.id}: drone set does not match drone homes")
    return report


def build_scenario(shippers: Sequence[tuple[str, Location]],
                   customers: Sequence[Customer],
                   drones: Sequence[Drone],
                   costs: CostParams) -> DeliveryScenario:
    """Assemble a scenario, deriving each shipper's membership sets."""
    full = []
    for sid, depot in shippers:
        full.append(Shipper(
            sid, depot,
            drones=[d.id for d in drones if d.home_shipper == sid],
            customers=[c.id for c in customers if c.owner == sid]))
    return DeliveryScenario(full, customers, drones, costs)


@dataclass(frozen=True, order=True)
class Coalition:
    """A nonempty set of cooperating shippers, stored sorted for determinism."""

    members: tuple[str, ...]

    def __init__(self, members: Iterable[str]) -> None:
        ordered = tuple(sorted(set(members)))
        if not ordered:
            raise ValueError("coalition must be nonempty")
        object.__setattr__(self, "members", ordered)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[str]:
        return iter(self.members)

    def __contains__(self, sid: object) -> bool:
        return sid in self.members

    def label(self) -> str:
        return ",".join(self.members)

    def without(self, sid: str) -> "Coalition":
        return Coalition(m for m in self.members if m != sid)

    def with_member(self, sid: str) -> "Coalition":
        return Coalition(self.members + (sid,))


@dataclass(frozen=True, order=True)
class CoalitionStructure:
    """A partition of the shipper set into disjoint coalitions."""

    coalitions: tuple[Coalition, ...]

    def __init__(self, coalitions: Iterable[Coalition]) -> None:
        blocks = tuple(sorted(coalitions, key=lambda c: c.members))
        seen: set[str] = set()
        for block in blocks:
            for m in block:
                if m in seen:
                    raise ValueError(f"shipper {m} appears in two coalitions")
                seen.add(m)
        object.__setattr__(self, "coalitions", blocks)

    def __iter__(self) -> Iterator[Coalition]:
        return iter(self.coalitions)

    def __len__(self) -> int:
        return len(self.coalitions)

    def shippers(self) -> tuple[str, ...]:
        return tuple(sorted(m for c in self.coalitions for m in c))

    def coalition_of(self, sid: str) -> Coalition:
        for c in self.coalitions:
            if sid in c:
                return c
        raise KeyError(sid)

    def label(self) -> str:
        """Canonical grammar: members joined by ',', coalitions by '|'."""
        return "|".join(c.label() for c in self.coalitions)

    @staticmethod
    def singletons(shipper_ids: Iterable[str]) -> "CoalitionStructure":
        return CoalitionStructure([Coalition([s]) for s in shipper_ids])

    @staticmethod
    def grand(shipper_ids: Iterable[str]) -> "CoalitionStructure":
        return CoalitionStructure([Coalition(shipper_ids)])


def parse_structure(spec: str) -> CoalitionStructure:
    """Parse the CLI grammar "p1,p2|p3,p4" into a structure."""
    spec = spec.strip()
    if not spec:
        raise ValueError("empty coalition structure spec")
    blocks = []
    for part in spec.split("|"):
        members = [m.strip() for m in part.split(",") if m.strip()]
        if not members:
            raise ValueError(f"empty coalition in spec {spec!r}")
        blocks.append(Coalition(members))
    return CoalitionStructure(blocks)


def parse_coalition(spec: str) -> Coalition:
    members = [m.strip() for m in spec.split(",") if m.strip()]
    if not members:
        raise ValueError("empty coalition spec")
    return Coalition(members)


def _partitions(items: tuple[str, ...]) -> Iterator[list[list[str]]]:
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for part in _partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[head] + part[i]] + part[i + 1:]
        yield [[head]] + part


def all_structures(shipper_ids: Iterable[str]) -> list[CoalitionStructure]:
    """Every coalition structure over the given shippers (Bell-number many).

    Ordered smallest blocks first: partitions are sorted by their descending
    block-size profile, then by label.  For four shippers this reproduces the
    conventional Phi_1 (all singletons) .. Phi_15 (grand coalition) listing.
    """
    ids = tuple(sorted(set(shipper_ids)))
    structures = [CoalitionStructure([Coalition(b) for b in part])
                  for part in _partitions(ids)]

    def key(structure: CoalitionStructure) -> tuple:
        sizes = tuple(sorted((len(c) for c in structure), reverse=True))
        return (sizes, structure.label())

    return sorted(structures, key=key)


@lru_cache(maxsize=None)
def bell_number(n: int) -> int:
    if n == 0:
        return 1
    row = [1]
    for _ in range(n - 1):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[-1]
