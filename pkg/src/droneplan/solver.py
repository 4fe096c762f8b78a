"""Exact optimization of the package-assignment program.

The search works on the natural decision space instead of a generic MILP tree:
a full assignment is determined by (a) which depot each used drone departs
from and (b) for every customer, either the serving drone or the carrier.
Every other variable of the program (W, T, M, B, N and the penalty
auxiliaries) is forced by those choices at any optimum with non-negative
costs, so the solver enumerates choice vectors depth-first with an admissible
lower bound and returns the exact optimum.

Determinism contract: among equal-cost optima the solver returns the solution
with the lexicographically smallest canonical decision encoding.  Customers
are visited in sorted-id order; for each customer the option codes are

    code(d, q) = index(d) * |S| + index(q)     (serve, drones/depots sorted)
    code(out)  = |D| * |S|                     (outsource, always last)

and depth-first exploration in ascending code order discovers complete
solutions in ascending key order, so the first optimum found is canonical.
Unused drones are pinned to their home depot.  Identical unused drones are
interchangeable; only the lowest-indexed one of each equivalence class may be
opened, which preserves the canonical optimum and prunes symmetric subtrees.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Mapping

from .model import Coalition, Customer, DeliveryScenario, Drone, distance
from .penalty import expected_penalty
from .program import AssignmentError, Mode, build_program

ORACLE_MAX_CUSTOMERS = 8
ORACLE_MAX_DRONES = 3


@dataclass(frozen=True)
class ObjectiveBreakdown:
    initial: Fraction
    routing: Fraction
    transfer: Fraction
    outsource: Fraction
    expected_penalty: Fraction

    @property
    def total(self) -> Fraction:
        return (self.initial + self.routing + self.transfer
                + self.outsource + self.expected_penalty)


@dataclass(frozen=True)
class AssignmentSolution:
    """Values of every decision variable for one coalition's plan."""

    mode: Mode
    coalition: Coalition
    objective: Fraction
    use_drone: dict[str, int]
    assign: dict[tuple[str, str, str], int]  # (customer, drone, depot) -> 0/1
    outsourced: dict[str, int]
    transfers_active: dict[str, int]
    transfer: dict[tuple[str, str, str], int]  # (customer, from, to) -> 0/1
    depot_of_drone: dict[tuple[str, str], int]
    served_count: dict[str, int]
    penalty_terms: dict[tuple[int, str], Fraction] = field(default_factory=dict)  # A
    prefix_flags: dict[tuple[int, str], int] = field(default_factory=dict)  # X
    penalty_values: dict[tuple[int, str], Fraction] = field(default_factory=dict)  # V

    def served_by(self, customer_id: str) -> tuple[str, str] | None:
        """(drone, depot) serving the customer, or None if outsourced."""
        for (c, d, p), v in self.assign.items():
            if v and c == customer_id:
                return d, p
        return None

    def variable_values(self) -> dict[str, Fraction]:
        """Flatten into program-variable values for feasibility checking."""
        vals: dict[str, Fraction] = {}
        for d, v in self.use_drone.items():
            vals[f"W[{d}]"] = Fraction(v)
        for (c, d, p), v in self.assign.items():
            vals[f"Y[{c},{d},{p}]"] = Fraction(v)
        for c, v in self.outsourced.items():
            vals[f"Z[{c}]"] = Fraction(v)
        for p, v in self.transfers_active.items():
            vals[f"T[{p}]"] = Fraction(v)
        for (c, p, q), v in self.transfer.items():
            vals[f"M[{c},{p},{q}]"] = Fraction(v)
        for (d, p), v in self.depot_of_drone.items():
            vals[f"B[{d},{p}]"] = Fraction(v)
        for d, v in self.served_count.items():
            vals[f"N[{d}]"] = Fraction(v)
        for (k, d), v in self.penalty_terms.items():
            vals[f"A[{k},{d}]"] = Fraction(v)
        for (k, d), v in self.prefix_flags.items():
            vals[f"X[{k},{d}]"] = Fraction(v)
        for (k, d), v in self.penalty_values.items():
            vals[f"V[{k},{d}]"] = Fraction(v)
        return vals


class _Instance:
    """Preprocessed, index-based view of one coalition's pooled problem."""

    def __init__(self, scenario: DeliveryScenario, coalition: Coalition, mode: Mode):
        known = {s.id for s in scenario.shippers}
        unknown = [p for p in coalition if p not in known]
        if unknown:
            raise AssignmentError(f"unknown shipper {unknown[0]!r} in coalition")
        self.scenario = scenario
        self.coalition = coalition
        self.mode = mode
        self.members: list[str] = list(coalition.members)
        self.custs: list[Customer] = list(scenario.customers_of(self.members))
        self.drones: list[Drone] = list(scenario.drones_of(self.members))
        self.cp = scenario.costs
        self.member_idx = {p: i for i, p in enumerate(self.members)}
        ns, nd, nc = len(self.members), len(self.drones), len(self.custs)
        self.out_code = nd * ns

        # round-trip distance and routing cost per (depot, customer)
        self.dist2 = [[2 * distance(scenario.shipper(p).depot, c.location)
                       for c in self.custs] for p in self.members]
        self.route_cost = [[self.cp.routing_rate * self.dist2[qi][ci]
                            for ci in range(nc)] for qi in range(ns)]

        stochastic = mode is Mode.STOCHASTIC
        self.marginal: list[list[Fraction]] = []
        for d in self.drones:
            if stochastic and d.breakdown_prob > 0 and self.cp.penalty_cost > 0:
                steps, survive = [], Fraction(1)
                for _ in range(nc):
                    survive *= 1 - d.breakdown_prob
                    steps.append(self.cp.penalty_cost * (1 - survive))
                self.marginal.append(steps)
            else:
                self.marginal.append([Fraction(0)] * nc)

        # feasible serve options per customer, ascending by code
        self.options: list[list[tuple[int, int, int, Fraction, Fraction, Fraction]]] = []
        for ci, c in enumerate(self.custs):
            opts = []
            for di, d in enumerate(self.drones):
                if c.weight > d.capacity:
                    continue
                for qi in range(ns):
                    trip = self.dist2[qi][ci]
                    if trip > d.trip_range:
                        continue
                    opts.append((di * ns + qi, di, qi, self.route_cost[qi][ci],
                                 trip, trip / d.speed + c.service_time))
            self.options.append(opts)

        # interchangeable-drone classes for symmetry pruning
        def drone_class(d: Drone) -> tuple:
            return (d.capacity, d.trip_range, d.daily_range, d.shift_hours,
                    d.speed, d.breakdown_prob, d.initial_cost)

        self.class_of = [drone_class(d) for d in self.drones]

    def transfer_pair(self, ci: int, qi: int) -> tuple[int, int] | None:
        """(owner_idx, depot_idx) if serving customer ci from depot qi
        requires a transfer, else None."""
        owner = self.member_idx[self.custs[ci].owner]
        if owner == qi:
            return None
        return owner, qi


def _search(inst: _Instance) -> tuple[Fraction, tuple[int, ...], tuple[int, ...]]:
    """Return (optimal cost, per-customer codes, per-drone depot indices)."""
    nc, nd, ns = len(inst.custs), len(inst.drones), len(inst.members)
    out_cost = inst.cp.outsource_cost
    transfer_cost = inst.cp.transfer_cost

    # admissible per-customer bound: cheapest conceivable way to handle it
    lb = []
    for ci in range(nc):
        best = out_cost
        for _, di, _, rc, _, _ in inst.options[ci]:
            cand = rc + (inst.marginal[di][0] if inst.marginal[di] else Fraction(0))
            if cand < best:
                best = cand
        lb.append(best)
    lb_suffix = [Fraction(0)] * (nc + 1)
    for ci in range(nc - 1, -1, -1):
        lb_suffix[ci] = lb_suffix[ci + 1] + lb[ci]
    ub_all_out = out_cost * nc

    depot = [-1] * nd
    count = [0] * nd
    dist_left = [d.daily_range for d in inst.drones]
    time_left = [d.shift_hours for d in inst.drones]
    active = [False] * ns  # transfer flags
    codes = [inst.out_code] * nc

    best: list = [None, None, None]  # cost, codes, depots

    def may_open(di: int) -> bool:
        cls = inst.class_of[di]
        for e in range(di):
            if depot[e] == -1 and inst.class_of[e] == cls:
                return False
        return True

    def dfs(ci: int, cost: Fraction) -> None:
        bound = cost + lb_suffix[ci]
        if bound > ub_all_out:
            return
        if best[0] is not None and bound >= best[0]:
            return
        if ci == nc:
            if best[0] is None or cost < best[0]:
                best[0] = cost
                best[1] = tuple(codes)
                best[2] = tuple(depot)
            return
        for code, di, qi, rc, trip, ttime in inst.options[ci]:
            opening = depot[di] == -1
            if opening:
                if not may_open(di):
                    continue
            elif depot[di] != qi:
                continue
            if trip > dist_left[di] or ttime > time_left[di]:
                continue
            add = rc + inst.marginal[di][count[di]]
            if opening:
                add += inst.drones[di].initial_cost
            pair = inst.transfer_pair(ci, qi)
            marked: list[int] = []
            if pair is not None:
                for s in pair:
                    if not active[s]:
                        active[s] = True
                        marked.append(s)
                        add += transfer_cost
            if opening:
                depot[di] = qi
            count[di] += 1
            dist_left[di] -= trip
            time_left[di] -= ttime
            codes[ci] = code
            dfs(ci + 1, cost + add)
            codes[ci] = inst.out_code
            dist_left[di] += trip
            time_left[di] += ttime
            count[di] -= 1
            if opening:
                depot[di] = -1
            for s in marked:
                active[s] = False
        dfs(ci + 1, cost + out_cost)  # outsource, highest code

    dfs(0, Fraction(0))
    assert best[0] is not None  # outsourcing everything is always feasible
    return best[0], best[1], best[2]


def _build_solution(inst: _Instance, cost: Fraction, codes: tuple[int, ...],
                    depots: tuple[int, ...]) -> AssignmentSolution:
    ns = len(inst.members)
    members, custs, drones = inst.members, inst.custs, inst.drones
    nc = len(custs)

    served: dict[int, list[int]] = {di: [] for di in range(len(drones))}
    out: set[int] = set()
    for ci, code in enumerate(codes):
        if code == inst.out_code:
            out.add(ci)
        else:
            served[code // ns].append(ci)

    use_drone = {d.id: int(bool(served[di])) for di, d in enumerate(drones)}
    assign = {(c.id, d.id, p): 0 for c in custs for d in drones for p in members}
    outsourced = {c.id: int(ci in out) for ci, c in enumerate(custs)}
    transfer = {(c.id, p, q): 0 for c in custs for p in members for q in members}
    transfers_active = {p: 0 for p in members}
    depot_of = {}
    for di, d in enumerate(drones):
        qi = depots[di] if served[di] else inst.member_idx[d.home_shipper]
        for pi, p in enumerate(members):
            depot_of[(d.id, p)] = int(pi == qi)

    initial = routing = Fraction(0)
    for di, d in enumerate(drones):
        if served[di]:
            initial += d.initial_cost
        for ci in served[di]:
            qi = depots[di]
            assign[(custs[ci].id, d.id, members[qi])] = 1
            routing += inst.route_cost[qi][ci]
            pair = inst.transfer_pair(ci, qi)
            if pair is not None:
                owner, dest = pair
                transfer[(custs[ci].id, members[owner], members[dest])] = 1
                transfers_active[members[owner]] = 1
                transfers_active[members[dest]] = 1

    transfer_total = inst.cp.transfer_cost * sum(transfers_active.values())
    outsource_total = inst.cp.outsource_cost * len(out)
    served_count = {d.id: len(served[di]) for di, d in enumerate(drones)}

    penalty_terms: dict[tuple[int, str], Fraction] = {}
    prefix_flags: dict[tuple[int, str], int] = {}
    penalty_values: dict[tuple[int, str], Fraction] = {}
    pen_total = Fraction(0)
    if inst.mode is Mode.STOCHASTIC:
        for di, d in enumerate(drones):
            n_d = len(served[di])
            survive = Fraction(1)
            for k in range(1, nc + 1):
                coeff = survive * d.breakdown_prob * inst.cp.penalty_cost
                v = coeff * (n_d - k + 1)
                penalty_values[(k, d.id)] = v
                prefix_flags[(k, d.id)] = int(k <= n_d)
                a = v if k <= n_d else Fraction(0)
                penalty_terms[(k, d.id)] = a
                pen_total += a
                survive *= 1 - d.breakdown_prob

    objective = initial + routing + transfer_total + outsource_total + pen_total
    assert objective == cost, "search cost must match reconstructed objective"
    return AssignmentSolution(
        mode=inst.mode, coalition=inst.coalition, objective=objective,
        use_drone=use_drone, assign=assign, outsourced=outsourced,
        transfers_active=transfers_active, transfer=transfer,
        depot_of_drone=depot_of, served_count=served_count,
        penalty_terms=penalty_terms, prefix_flags=prefix_flags,
        penalty_values=penalty_values)


def solve_assignment(scenario: DeliveryScenario, coalition: Coalition,
                     mode: Mode = Mode.STOCHASTIC) -> AssignmentSolution:
    """Exact optimum of the assignment program with canonical tie-breaking."""
    inst = _Instance(scenario, coalition, mode)
    cost, codes, depots = _search(inst)
    return _build_solution(inst, cost, codes, depots)


def brute_force_assignment(scenario: DeliveryScenario, coalition: Coalition,
                           mode: Mode = Mode.STOCHASTIC) -> AssignmentSolution:
    """Exhaustive oracle: enumerate every depot map and customer choice.

    Evaluates the quadratic objective directly (explicit per-position series,
    no linearization, no marginal telescoping) and keeps the minimum under the
    same canonical key as the solver.  Transfer variables beyond the forced
    owner-to-depot ones only ever add cost, so the minimum is unaffected by
    fixing them to zero.
    """
    inst = _Instance(scenario, coalition, mode)
    nc, nd, ns = len(inst.custs), len(inst.drones), len(inst.members)
    if nc > ORACLE_MAX_CUSTOMERS or nd > ORACLE_MAX_DRONES:
        raise AssignmentError("oracle size exceeded")
    cp = inst.cp
    stochastic = mode is Mode.STOCHASTIC

    best: tuple[Fraction, tuple[int, ...], tuple[int, ...]] | None = None
    for depots in product(range(ns), repeat=max(nd, 1)) if nd else [tuple()]:
        per_cust: list[list[int | None]] = []
        for ci, c in enumerate(inst.custs):
            opts: list[int | None] = []
            for di, d in enumerate(inst.drones):
                if c.weight <= d.capacity and inst.dist2[depots[di]][ci] <= d.trip_range:
                    opts.append(di)
            opts.append(None)
            per_cust.append(opts)
        for choices in product(*per_cust) if nc else [tuple()]:
            loads: dict[int, list[int]] = {di: [] for di in range(nd)}
            for ci, pick in enumerate(choices):
                if pick is not None:
                    loads[pick].append(ci)
            feasible = True
            for di, d in enumerate(inst.drones):
                total_dist = sum((inst.dist2[depots[di]][ci] for ci in loads[di]),
                                 Fraction(0))
                total_time = sum((inst.dist2[depots[di]][ci] / d.speed
                                  + inst.custs[ci].service_time for ci in loads[di]),
                                 Fraction(0))
                if total_dist > d.daily_range or total_time > d.shift_hours:
                    feasible = False
                    break
            if not feasible:
                continue

            cost = Fraction(0)
            active: set[int] = set()
            for di, d in enumerate(inst.drones):
                if loads[di]:
                    cost += d.initial_cost
                for ci in loads[di]:
                    cost += inst.route_cost[depots[di]][ci]
                    pair = inst.transfer_pair(ci, depots[di])
                    if pair is not None:
                        active.update(pair)
                n = len(loads[di])
                if stochastic and n:
                    p = d.breakdown_prob
                    for j in range(1, n + 1):
                        cost += (1 - p) ** (j - 1) * p * cp.penalty_cost * (n - j + 1)
            cost += cp.transfer_cost * len(active)
            cost += cp.outsource_cost * sum(1 for pick in choices if pick is None)

            key = tuple(inst.out_code if pick is None else pick * ns + depots[pick]
                        for pick in choices)
            cand = (cost, key, depots)
            if best is None or (cost, key) < (best[0], best[1]):
                best = cand
    assert best is not None
    return _build_solution(inst, best[0], best[1], best[2])


def solution_objective_under(scenario: DeliveryScenario, coalition: Coalition,
                             sol: AssignmentSolution, mode: Mode) -> Fraction:
    """Value of an existing plan under the requested objective mode."""
    return evaluate_objective(scenario, coalition, sol, mode).total


def evaluate_objective(scenario: DeliveryScenario, coalition: Coalition,
                       sol: AssignmentSolution,
                       mode: Mode | None = None) -> ObjectiveBreakdown:
    """Recompute the objective from raw variables via the quadratic form.

    Validates the solution against the program first and raises
    AssignmentError naming the violated constraint.  The penalty component is
    the direct per-drone series over N_d (zero in deterministic mode).
    """
    mode = mode or sol.mode
    values = sol.variable_values()
    # structural feasibility: check against the core (deterministic) program;
    # add the linearization block when the solution carries it
    check_mode = Mode.STOCHASTIC if (mode is Mode.STOCHASTIC and sol.penalty_terms) \
        else Mode.DETERMINISTIC
    program = build_program(scenario, coalition, check_mode)
    violations = program.check(values)
    if violations:
        raise AssignmentError(
            "solution violates " + ", ".join(violations[:5])
            + ("..." if len(violations) > 5 else ""))

    cp = scenario.costs
    members = list(coalition.members)
    initial = sum((scenario.drone(d).initial_cost for d, v in sol.use_drone.items() if v),
                  Fraction(0))
    routing = Fraction(0)
    for (c, d, p), v in sol.assign.items():
        if v:
            routing += 2 * cp.routing_rate * distance(
                scenario.shipper(p).depot, scenario.customer(c).location)
    transfer = cp.transfer_cost * sum(sol.transfers_active.get(p, 0) for p in members)
    outsource = cp.outsource_cost * sum(sol.outsourced.values())
    pen = Fraction(0)
    if mode is Mode.STOCHASTIC:
        for d, n in sol.served_count.items():
            pen += expected_penalty(n, scenario.drone(d).breakdown_prob, cp.penalty_cost)
    return ObjectiveBreakdown(initial, routing, transfer, outsource, pen)
