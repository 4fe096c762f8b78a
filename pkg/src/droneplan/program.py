"""Symbolic mixed-integer program for one coalition's package assignment.

The program is plain data: named variables, linear constraints and a linear
objective, all with exact rational coefficients.  It serves three purposes:
documentation of the model, feasibility checking of candidate solutions, and
cross-validation of the search-based solver.

Variable families (names in brackets):

  W[d]        drone d is used
  Y[i,d,p]    customer i served by drone d departing from depot p
  Z[i]        customer i outsourced to the carrier
  T[p]        shipper p sends or receives at least one transfer
  M[i,p,q]    package of customer i transferred from shipper p to shipper q
  B[d,p]      drone d departs from (and returns to) depot p
  N[d]        number of customers served by drone d

Stochastic mode adds, indexed by prefix position k = 1..|C| per drone:

  X[k,d]      1 for the first N[d] positions, 0 after
  V[k,d]      affine penalty constant: (1-P_d)^(k-1) * P_d * c_pen * (N[d]-k+1)
  A[k,d]      realized penalty term: equals V[k,d] while X[k,d] = 1, else 0

The per-position penalty coefficient uses (N - k + 1) remaining packages,
matching the quadratic objective the linearization replaces.  V is defined by
an equality and therefore goes negative for positions past N[d]; A stays
non-negative and is only forced up to V where X is set.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .model import Coalition, DeliveryScenario, distance
from .numeric import frac_str


class Mode(str, enum.Enum):
    DETERMINISTIC = "deterministic"
    STOCHASTIC = "stochastic"


class AssignmentError(Exception):
    """Raised for invalid assignment inputs or infeasible candidate solutions."""


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str  # "binary" | "integer" | "continuous"
    lower: Fraction | None = Fraction(0)
    upper: Fraction | None = None


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple[tuple[Fraction, str], ...]
    sense: str  # "<=", "==", ">="
    rhs: Fraction

    def evaluate(self, values: Mapping[str, Fraction]) -> Fraction:
        return sum((coef * values.get(var, Fraction(0)) for coef, var in self.terms),
                   Fraction(0))

    def satisfied(self, values: Mapping[str, Fraction]) -> bool:
        lhs = self.evaluate(values)
        if self.sense == "<=":
            return lhs <= self.rhs
        if self.sense == ">=":
            return lhs >= self.rhs
        return lhs == self.rhs


@dataclass(frozen=True)
class AssignmentProgram:
    mode: Mode
    coalition: Coalition
    variables: tuple[Variable, ...]
    constraints: tuple[Constraint, ...]
    objective: tuple[tuple[Fraction, str], ...]  # minimized

    def variables_by_family(self) -> dict[str, list[Variable]]:
        out: dict[str, list[Variable]] = {}
        for v in self.variables:
            out.setdefault(v.name.split("[", 1)[0], []).append(v)
        return out

    def objective_value(self, values: Mapping[str, Fraction]) -> Fraction:
        return sum((coef * values.get(var, Fraction(0)) for coef, var in self.objective),
                   Fraction(0))

    def check(self, values: Mapping[str, Fraction]) -> list[str]:
        """Return the names of violated constraints/bounds (empty = feasible)."""
        bad: list[str] = []
        for v in self.variables:
            val = values.get(v.name, Fraction(0))
            if v.kind in ("binary", "integer") and val.denominator != 1:
                bad.append(f"integrality:{v.name}")
            if v.lower is not None and val < v.lower:
                bad.append(f"lower_bound:{v.name}")
            if v.upper is not None and val > v.upper:
                bad.append(f"upper_bound:{v.name}")
        for c in self.constraints:
            if not c.satisfied(values):
                bad.append(c.name)
        return bad


def _y(i: str, d: str, p: str) -> str:
    return f"Y[{i},{d},{p}]"


def _m(i: str, p: str, q: str) -> str:
    return f"M[{i},{p},{q}]"


def build_program(scenario: DeliveryScenario, coalition: Coalition,
                  mode: Mode = Mode.STOCHASTIC) -> AssignmentProgram:
    """Assemble the assignment program over the coalition's pooled resources."""
    if not coalition.members:
        raise AssignmentError("coalition must be nonempty")
    unknown = [p for p in coalition if p not in {s.id for s in scenario.shippers}]
    if unknown:
        raise AssignmentError(f"unknown shipper {unknown[0]!r} in coalition")

    members = list(coalition.members)
    custs = scenario.customers_of(members)
    drones = scenario.drones_of(members)
    cp = scenario.costs
    n_c = len(custs)
    delta = Fraction(cp.big_m if cp.big_m is not None else n_c + 1)

    variables: list[Variable] = []
    constraints: list[Constraint] = []
    objective: list[tuple[Fraction, str]] = []
    one = Fraction(1)

    for d in drones:
        variables.append(Variable(f"W[{d.id}]", "binary", Fraction(0), Fraction(1)))
        objective.append((d.initial_cost, f"W[{d.id}]"))
    for c in custs:
        for d in drones:
            for p in members:
                variables.append(Variable(_y(c.id, d.id, p), "binary", Fraction(0), one))
                round_trip = 2 * cp.routing_rate * distance(scenario.shipper(p).depot, c.location)
                objective.append((round_trip, _y(c.id, d.id, p)))
    for c in custs:
        variables.append(Variable(f"Z[{c.id}]", "binary", Fraction(0), one))
        objective.append((cp.outsource_cost, f"Z[{c.id}]"))
    for p in members:
        variables.append(Variable(f"T[{p}]", "binary", Fraction(0), one))
        objective.append((cp.transfer_cost, f"T[{p}]"))
    for c in custs:
        for p in members:
            for q in members:
                variables.append(Variable(_m(c.id, p, q), "binary", Fraction(0), one))
    for d in drones:
        for p in members:
            variables.append(Variable(f"B[{d.id},{p}]", "binary", Fraction(0), one))
    for d in drones:
        variables.append(Variable(f"N[{d.id}]", "integer", Fraction(0), Fraction(n_c)))

    # drone activation: packages on a drone force its initial cost
    for d in drones:
        constraints.append(Constraint(
            f"drone_activation[{d.id}]",
            tuple([(one, _y(c.id, d.id, p)) for c in custs for p in members]
                  + [(-delta, f"W[{d.id}]")]),
            "<=", Fraction(0)))

    # transfer flags: sending or receiving any package marks the shipper
    for p in members:
        constraints.append(Constraint(
            f"transfer_out_flag[{p}]",
            tuple([(one, _m(c.id, p, q)) for c in custs for q in members]
                  + [(-delta, f"T[{p}]")]),
            "<=", Fraction(0)))
        constraints.append(Constraint(
            f"transfer_in_flag[{p}]",
            tuple([(one, _m(c.id, q, p)) for c in custs for q in members]
                  + [(-delta, f"T[{p}]")]),
            "<=", Fraction(0)))

    # per-trip weight capacity
    for c in custs:
        for d in drones:
            constraints.append(Constraint(
                f"capacity[{c.id},{d.id}]",
                tuple((c.weight, _y(c.id, d.id, p)) for p in members),
                "<=", d.capacity))

    # every package is served by exactly one (drone, depot) or outsourced
    for c in custs:
        constraints.append(Constraint(
            f"allocation[{c.id}]",
            tuple([(one, _y(c.id, d.id, p)) for d in drones for p in members]
                  + [(one, f"Z[{c.id}]")]),
            "==", one))

    # owner dispatch: unless served from its own depot or outsourced, the
    # owner must transfer the package somewhere.  The outsourcing escape is
    # activated once, not per drone, so a droneless coalition can still
    # outsource everything (any positive big-M multiple gives the same
    # feasible set).
    for c in custs:
        for p in members:
            own = Fraction(1 if c.owner == p else 0)
            terms = [(-one, _m(c.id, p, q)) for q in members]
            terms += [(-delta, _y(c.id, d.id, p)) for d in drones]
            terms.append((-delta, f"Z[{c.id}]"))
            constraints.append(Constraint(
                f"owner_dispatch[{c.id},{p}]", tuple(terms), "<=", -own))

    # flight limits: per-trip range, per-day range, per-day shift time
    for c in custs:
        for d in drones:
            constraints.append(Constraint(
                f"trip_range[{c.id},{d.id}]",
                tuple((2 * distance(scenario.shipper(p).depot, c.location),
                       _y(c.id, d.id, p)) for p in members),
                "<=", d.trip_range))
    for d in drones:
        constraints.append(Constraint(
            f"daily_range[{d.id}]",
            tuple((2 * distance(scenario.shipper(p).depot, c.location),
                   _y(c.id, d.id, p)) for c in custs for p in members),
            "<=", d.daily_range))
        constraints.append(Constraint(
            f"shift_time[{d.id}]",
            tuple((2 * distance(scenario.shipper(p).depot, c.location) / d.speed
                   + c.service_time, _y(c.id, d.id, p))
                  for c in custs for p in members),
            "<=", d.shift_hours))

    # a transferred package must actually be served from the target depot
    for c in custs:
        for p in members:
            for q in members:
                constraints.append(Constraint(
                    f"transfer_target_serves[{c.id},{p},{q}]",
                    tuple([(one, _m(c.id, p, q))]
                          + [(-one, _y(c.id, d.id, q)) for d in drones]),
                    "<=", Fraction(0)))

    # each package transferred at most once, never to the original depot
    for c in custs:
        constraints.append(Constraint(
            f"transfer_at_most_once[{c.id}]",
            tuple((one, _m(c.id, p, q)) for p in members for q in members),
            "<=", one))
        for p in members:
            constraints.append(Constraint(
                f"no_self_transfer[{c.id},{p}]",
                ((one, _m(c.id, p, p)),), "==", Fraction(0)))

    # single departure depot per drone
    for d in drones:
        for p in members:
            constraints.append(Constraint(
                f"depot_binding[{d.id},{p}]",
                tuple([(one, _y(c.id, d.id, p)) for c in custs]
                      + [(-delta, f"B[{d.id},{p}]")]),
                "<=", Fraction(0)))
        constraints.append(Constraint(
            f"single_depot[{d.id}]",
            tuple((one, f"B[{d.id},{p}]") for p in members),
            "==", one))

    # served-count accounting
    for d in drones:
        constraints.append(Constraint(
            f"served_count[{d.id}]",
            tuple([(one, _y(c.id, d.id, p)) for c in custs for p in members]
                  + [(-one, f"N[{d.id}]")]),
            "<=", Fraction(0)))

    if mode is Mode.STOCHASTIC:
        pen_delta = cp.penalty_cost * max(n_c, 1)  # upper bound on any V
        for d in drones:
            survive = Fraction(1)
            for k in range(1, n_c + 1):
                variables.append(Variable(f"A[{k},{d.id}]", "continuous", Fraction(0)))
                variables.append(Variable(f"X[{k},{d.id}]", "binary", Fraction(0), one))
                variables.append(Variable(f"V[{k},{d.id}]", "continuous", None))
                objective.append((one, f"A[{k},{d.id}]"))
                coeff = survive * d.breakdown_prob * cp.penalty_cost
                # V[k,d] = coeff * (N[d] - k + 1)
                constraints.append(Constraint(
                    f"penalty_value[{k},{d.id}]",
                    ((one, f"V[{k},{d.id}]"), (-coeff, f"N[{d.id}]")),
                    "==", coeff * (1 - k)))
                # A[k,d] >= V[k,d] - pen_delta * (1 - X[k,d])
                constraints.append(Constraint(
                    f"penalty_activation[{k},{d.id}]",
                    ((one, f"V[{k},{d.id}]"), (pen_delta, f"X[{k},{d.id}]"),
                     (-one, f"A[{k},{d.id}]")),
                    "<=", pen_delta))
                survive *= 1 - d.breakdown_prob
            constraints.append(Constraint(
                f"prefix_total[{d.id}]",
                tuple([(one, f"X[{k},{d.id}]") for k in range(1, n_c + 1)]
                      + [(-one, f"N[{d.id}]")]),
                "==", Fraction(0)))
            for k in range(1, n_c):
                constraints.append(Constraint(
                    f"prefix_order[{k},{d.id}]",
                    ((one, f"X[{k},{d.id}]"), (-one, f"X[{k + 1},{d.id}]")),
                    ">=", Fraction(0)))

    return AssignmentProgram(mode, coalition, tuple(variables),
                             tuple(constraints), tuple(objective))


def format_program(program: AssignmentProgram) -> str:
    """Human-readable dump, mainly for debugging small instances."""
    lines = [f"minimize  " + " + ".join(
        f"{frac_str(c)}*{v}" for c, v in program.objective if c != 0)]
    for con in program.constraints:
        expr = " + ".join(f"{frac_str(c)}*{v}" for c, v in con.terms)
        lines.append(f"{con.name}: {expr} {con.sense} {frac_str(con.rhs)}")
    return "\n".join(lines)
