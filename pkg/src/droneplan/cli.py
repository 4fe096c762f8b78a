"""Command-line interface.

Every producing subcommand writes a self-contained bundle into --out: the
data files plus a manifest.json recording the subcommand, parameters, input
paths, output names, seed and tool version.  Data files are byte-identical
across reruns with the same manifest; the manifest itself additionally
records the wall-clock duration, which is the only non-reproducible field.

Exit codes: 0 success, 2 input/validation error, 3 computation error,
4 I/O error.  DRONEPLAN_LOG controls log verbosity (DEBUG/INFO/WARNING).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import __version__
from .coalition import (BayesianGame, BeliefMatrix, merge_split,
                        stationary_distribution, transition_matrix)
from .costshare import CharacteristicCache, ShapleySizeError, shapley
from .dynamic import run_dynamic
from .ingest import (ParseError, ScenarioDocument, SynthesisConfig, load_scenario,
                     parse_solomon, scenario_to_json, synthesize_scenario)
from .model import (Coalition, CoalitionStructure, CostParams, DeliveryScenario,
                    Drone, all_structures, parse_coalition, parse_structure,
                    validate_scenario)
from .numeric import frac, frac_str, money_str
from .program import AssignmentError, Mode
from .sim import FRAMEWORKS, SimConfig, compare_frameworks, simulate_plan
from .solver import AssignmentSolution, evaluate_objective, solve_assignment

log = logging.getLogger("droneplan")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_COMPUTE = 3
EXIT_IO = 4


class InputError(Exception):
    pass


def _mode(value: str) -> Mode:
    aliases = {"det": Mode.DETERMINISTIC, "deterministic": Mode.DETERMINISTIC,
               "sto": Mode.STOCHASTIC, "stochastic": Mode.STOCHASTIC}
    try:
        return aliases[value.lower()]
    except KeyError:
        raise InputError(f"unknown mode {value!r} (use deterministic or stochastic)")


def _parse_rates(spec: str, what: str) -> dict[str, Fraction]:
    """Parse "p3=0.25,p4=0.1" into a shipper -> probability map."""
    out: dict[str, Fraction] = {}
    if not spec:
        return out
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise InputError(f"bad {what} entry {part!r}, expected shipper=prob")
        sid, _, value = part.partition("=")
        try:
            out[sid.strip()] = frac(value.strip())
        except (ValueError, TypeError):
            raise InputError(f"bad probability in {what} entry {part!r}")
    return out


def _check_members(scenario: DeliveryScenario, members) -> None:
    known = set(scenario.shipper_ids())
    for sid in members:
        if sid not in known:
            raise InputError(f"unknown shipper {sid!r}")


def _structure(spec: str) -> CoalitionStructure:
    try:
        return parse_structure(spec)
    except ValueError as exc:
        raise InputError(str(exc))


def _coalition(spec: str) -> Coalition:
    try:
        return parse_coalition(spec)
    except ValueError as exc:
        raise InputError(str(exc))


def _load(path: str) -> ScenarioDocument:
    doc = load_scenario(path)
    problems = validate_scenario(doc.scenario)
    if problems:
        raise InputError("invalid scenario: " + "; ".join(problems))
    return doc


class Bundle:
    """Collects output files, then writes them plus the run manifest."""

    def __init__(self, outdir: str, subcommand: str, params: dict, inputs: list[str],
                 seed: int | None):
        self.outdir = Path(outdir)
        self.subcommand = subcommand
        self.params = {k: str(v) for k, v in sorted(params.items())}
        self.inputs = inputs
        self.seed = seed
        self.files: dict[str, str] = {}
        self.started = time.monotonic()

    def add(self, name: str, content: str) -> None:
        self.files[name] = content

    def add_csv(self, name: str, header: list[str], rows) -> None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
        self.add(name, buf.getvalue())

    def write(self) -> None:
        self.outdir.mkdir(parents=True, exist_ok=True)
        for name, content in sorted(self.files.items()):
            (self.outdir / name).write_text(content, encoding="utf-8")
        manifest = {
            "tool": "droneplan",
            "version": __version__,
            "subcommand": self.subcommand,
            "params": self.params,
            "inputs": self.inputs,
            "outputs": sorted(self.files),
            "seed": self.seed,
            "duration_seconds": round(time.monotonic() - self.started, 6),
        }
        (self.outdir / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        log.info("wrote %d files to %s", len(self.files) + 1, self.outdir)


def _solve_one(args: tuple) -> tuple[tuple[str, ...], AssignmentSolution]:
    scenario, members, mode = args
    return members, solve_assignment(scenario, Coalition(members), mode)


def warm_cache(cache: CharacteristicCache, coalitions: list[Coalition],
               jobs: int) -> None:
    """Fill the characteristic cache, distributing solves across processes."""
    todo = sorted({c for c in coalitions if c not in cache.solutions})
    if not todo:
        return
    if jobs <= 1 or len(todo) <= 1:
        for c in todo:
            cache.solution(c)
        return
    with ProcessPoolExecutor(max_workers=min(jobs, len(todo))) as pool:
        results = list(pool.map(
            _solve_one, [(cache.scenario, c.members, cache.mode) for c in todo]))
    cache.preload((Coalition(members), sol) for members, sol in sorted(results))


def all_subsets(shipper_ids) -> list[Coalition]:
    ids = sorted(shipper_ids)
    return [Coalition([ids[i] for i in range(len(ids)) if mask >> i & 1])
            for mask in range(1, 1 << len(ids))]


# --- solution serialization ----------------------------------------------


def solution_to_json(sol: AssignmentSolution) -> str:
    doc = {
        "mode": sol.mode.value,
        "coalition": sol.coalition.label(),
        "objective": frac_str(sol.objective),
        "objective_money": money_str(sol.objective),
        "W": [{"drone": d, "value": v} for d, v in sorted(sol.use_drone.items())],
        "Y": [{"customer": c, "drone": d, "depot": p, "value": v}
              for (c, d, p), v in sorted(sol.assign.items()) if v],
        "Z": [{"customer": c, "value": v} for c, v in sorted(sol.outsourced.items())],
        "T": [{"shipper": p, "value": v}
              for p, v in sorted(sol.transfers_active.items())],
        "M": [{"customer": c, "from": p, "to": q, "value": v}
              for (c, p, q), v in sorted(sol.transfer.items()) if v],
        "B": [{"drone": d, "depot": p, "value": v}
              for (d, p), v in sorted(sol.depot_of_drone.items()) if v],
        "N": [{"drone": d, "value": v} for d, v in sorted(sol.served_count.items())],
        "A": [{"position": k, "drone": d, "value": frac_str(v)}
              for (k, d), v in sorted(sol.penalty_terms.items()) if v],
        "X": [{"position": k, "drone": d, "value": v}
              for (k, d), v in sorted(sol.prefix_flags.items()) if v],
        "V": [{"position": k, "drone": d, "value": frac_str(v)}
              for (k, d), v in sorted(sol.penalty_values.items()) if v],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# --- subcommands ----------------------------------------------------------


def cmd_validate(args) -> int:
    doc = load_scenario(args.scenario)
    problems = validate_scenario(doc.scenario)
    for p in problems:
        print(p)
    if problems:
        return EXIT_INPUT
    print("ok")
    return EXIT_OK


def cmd_solomon(args) -> int:
    with open(args.input, "r", encoding="utf-8") as fh:
        inst = parse_solomon(fh.read())
    depot_ids = None
    if args.depots:
        try:
            depot_ids = tuple(int(x) for x in args.depots.split(","))
        except ValueError:
            raise InputError(f"bad --depots {args.depots!r}, expected row ids")
    drone = dict(SynthesisConfig().drone)
    costs = dict(SynthesisConfig().costs)
    for name in ("breakdown_prob", "initial_cost"):
        value = getattr(args, name)
        if value is not None:
            drone[name] = frac(value)
    for name in ("routing_rate", "transfer_cost", "outsource_cost", "penalty_cost"):
        value = getattr(args, name)
        if value is not None:
            costs[name] = frac(value)
    cfg = SynthesisConfig(
        depot_row_ids=depot_ids, customer_count=args.customers,
        coord_scale=frac(args.coord_scale), weight_scale=frac(args.weight_scale),
        drone=drone, costs=costs, belief=frac(args.belief))
    scenario = synthesize_scenario(inst, cfg)
    beliefs = BeliefMatrix.uniform(scenario.shipper_ids(), cfg.belief)
    bundle = Bundle(args.out, "solomon", vars_of(args), [args.input], None)
    bundle.add("scenario.json", scenario_to_json(
        scenario, beliefs, meta={"source": inst.name,
                                 "customers": len(scenario.customers)}))
    bundle.write()
    return EXIT_OK


def cmd_assign(args) -> int:
    doc = _load(args.scenario)
    coalition = _coalition(args.coalition)
    _check_members(doc.scenario, coalition.members)
    mode = _mode(args.mode)
    sol = solve_assignment(doc.scenario, coalition, mode)
    breakdown = evaluate_objective(doc.scenario, coalition, sol, mode)
    bundle = Bundle(args.out, "assign", vars_of(args), [args.scenario], None)
    bundle.add("solution.json", solution_to_json(sol))
    bundle.add_csv("breakdown.csv", ["component", "value", "value_money"], [
        ["initial", frac_str(breakdown.initial), money_str(breakdown.initial)],
        ["routing", frac_str(breakdown.routing), money_str(breakdown.routing)],
        ["transfer", frac_str(breakdown.transfer), money_str(breakdown.transfer)],
        ["outsource", frac_str(breakdown.outsource), money_str(breakdown.outsource)],
        ["expected_penalty", frac_str(breakdown.expected_penalty),
         money_str(breakdown.expected_penalty)],
        ["total", frac_str(breakdown.total), money_str(breakdown.total)],
    ])
    bundle.write()
    return EXIT_OK


def _allocation_rows(scenario, cache, structure):
    for coalition in structure:
        alloc = shapley(cache, scenario, coalition)
        for sid in coalition.members:
            yield [structure.label(), coalition.label(), sid,
                   frac_str(alloc.shares[sid]), money_str(alloc.shares[sid])]


def cmd_shapley(args) -> int:
    doc = _load(args.scenario)
    structure = _structure(args.structure)
    _check_members(doc.scenario, structure.shippers())
    mode = _mode(args.mode)
    cache = CharacteristicCache(doc.scenario, mode)
    for coalition in structure:
        warm_cache(cache, all_subsets(coalition.members), args.jobs)
    bundle = Bundle(args.out, "shapley", vars_of(args), [args.scenario], None)
    bundle.add_csv("allocations.csv",
                   ["structure", "coalition", "shipper", "share", "share_money"],
                   _allocation_rows(doc.scenario, cache, structure))
    bundle.write()
    return EXIT_OK


def cmd_coalition(args) -> int:
    doc = _load(args.scenario)
    mode = _mode(args.mode)
    initial = None
    if args.initial:
        initial = _structure(args.initial)
        _check_members(doc.scenario, initial.shippers())
    cache = CharacteristicCache(doc.scenario, mode)
    warm_cache(cache, all_subsets(doc.scenario.shipper_ids()), args.jobs)
    result = merge_split(doc.scenario, doc.beliefs, initial=initial,
                         mode=mode, cache=cache)
    bundle = Bundle(args.out, "coalition", vars_of(args), [args.scenario], None)

    def nu_str(v):
        return "INVALID" if v is None else frac_str(v)

    bundle.add_csv("trace.csv",
                   ["step", "mover", "structure", "nu_before", "nu_after"],
                   ([s.index, s.mover, s.structure.label(),
                     nu_str(s.nu_before), nu_str(s.nu_after)] for s in result.trace))
    bundle.add("stable_structure.txt", result.structure.label() + "\n")
    visited_structures = []
    start = initial if initial is not None \
        else CoalitionStructure.singletons(doc.scenario.shipper_ids())
    for structure in [start] + [s.structure for s in result.trace]:
        if structure not in visited_structures:
            visited_structures.append(structure)
    rows = []
    for structure in visited_structures:
        rows.extend(_allocation_rows(doc.scenario, cache, structure))
    bundle.add_csv("allocations.csv",
                   ["structure", "coalition", "shipper", "share", "share_money"],
                   rows)
    bundle.write()
    return EXIT_OK


def cmd_markov(args) -> int:
    doc = _load(args.scenario)
    mode = _mode(args.mode)
    cache = CharacteristicCache(doc.scenario, mode)
    warm_cache(cache, all_subsets(doc.scenario.shipper_ids()), args.jobs)
    model = transition_matrix(doc.scenario, doc.beliefs, frac(args.alpha),
                              frac(args.epsilon), mode=mode, cache=cache)
    pi = stationary_distribution(model)
    bundle = Bundle(args.out, "markov", vars_of(args), [args.scenario], None)
    bundle.add_csv("stationary.csv", ["structure", "pi", "pi_float"],
                   ([s.label(), frac_str(pi.pi[s]), repr(float(pi.pi[s]))]
                    for s in model.states))
    if args.emit_q:
        rows = []
        for i, src in enumerate(model.states):
            for j, dst in enumerate(model.states):
                if model.matrix[i][j] != 0:
                    rows.append([src.label(), dst.label(),
                                 frac_str(model.matrix[i][j])])
        bundle.add_csv("transitions.csv", ["from", "to", "probability"], rows)
    bundle.write()
    return EXIT_OK


def cmd_dynamic(args) -> int:
    doc = _load(args.scenario)
    mode = _mode(args.mode)
    truth = _parse_rates(args.truth, "--truth")
    _check_members(doc.scenario, truth)
    initial = doc.beliefs if args.initial_belief is None else BeliefMatrix.uniform(
        doc.scenario.shipper_ids(), frac(args.initial_belief))
    records = run_dynamic(
        doc.scenario, truth, initial, eps=frac(args.error_prob),
        w1=frac(args.w1), w2=frac(args.w2), max_iters=args.iters,
        seed=args.seed, mode=mode)
    bundle = Bundle(args.out, "dynamic", vars_of(args), [args.scenario], args.seed)
    belief_rows = []
    for rec in records:
        observed = {o.pair: o for o in rec.observations}
        for (p, q), lam in sorted(rec.beliefs_after.items()):
            obs = observed.get((p, q))
            belief_rows.append([
                rec.iteration, p, q,
                obs.assigned if obs else 0,
                obs.delivered if obs else 0,
                frac_str(lam), repr(float(lam))])
    bundle.add_csv("beliefs.csv",
                   ["iteration", "from", "to", "assigned", "delivered",
                    "lambda", "lambda_float"], belief_rows)
    bundle.add_csv("structure.csv",
                   ["iteration", "structure", "max_delta"],
                   ([r.iteration, r.structure.label(), frac_str(r.max_delta)]
                    for r in records))
    bundle.write()
    return EXIT_OK


def _sim_rows(report):
    for sid in sorted(report.per_shipper_mean):
        mean = report.per_shipper_mean[sid]
        yield ["shipper", sid, frac_str(mean), money_str(mean),
               repr(report.per_shipper_stderr[sid])]
    for coalition in sorted(report.per_coalition_mean):
        mean = report.per_coalition_mean[coalition]
        yield ["coalition", coalition.label(), frac_str(mean), money_str(mean), ""]
    yield ["total", "", frac_str(report.total_mean), money_str(report.total_mean), ""]
    yield ["mean_penalty", "", frac_str(report.mean_penalty),
           money_str(report.mean_penalty), ""]
    yield ["delivered", "", str(report.delivered_count), "", ""]
    yield ["assigned", "", str(report.assigned_count), "", ""]


def cmd_simulate(args) -> int:
    doc = _load(args.scenario)
    structure = _structure(args.structure) if args.structure else \
        CoalitionStructure.grand(doc.scenario.shipper_ids())
    _check_members(doc.scenario, structure.shippers())
    mode = _mode(args.mode)
    misbehavior = _parse_rates(args.misbehavior, "--misbehavior")
    _check_members(doc.scenario, misbehavior)
    cache = CharacteristicCache(doc.scenario, mode)
    for coalition in structure:
        warm_cache(cache, all_subsets(coalition.members), args.jobs)
    solutions = {c: cache.solution(c) for c in structure}
    config = SimConfig(runs=args.runs, seed=args.seed, misbehavior=misbehavior)
    report = simulate_plan(doc.scenario, structure, solutions, config,
                           cache=cache, keep_events=args.events)
    bundle = Bundle(args.out, "simulate", vars_of(args), [args.scenario], args.seed)
    bundle.add_csv("report.csv", ["scope", "id", "mean", "mean_money", "stderr"],
                   _sim_rows(report))
    if args.events:
        events = [{
            "run": e.run,
            "drone_failures": e.drone_failures,
            "failed_packages": list(e.failed_packages),
            "flown_packages": list(e.flown_packages),
            "total_cost": frac_str(e.total_cost),
        } for e in report.events]
        bundle.add("events.json", json.dumps(events, indent=2, sort_keys=True) + "\n")
    bundle.write()
    return EXIT_OK


def cmd_compare(args) -> int:
    doc = _load(args.scenario)
    misbehavior = _parse_rates(args.misbehavior, "--misbehavior")
    _check_members(doc.scenario, misbehavior)
    config = SimConfig(runs=args.runs, seed=args.seed, misbehavior=misbehavior)
    outcomes = compare_frameworks(doc.scenario, config, beliefs=doc.beliefs)
    bundle = Bundle(args.out, "compare", vars_of(args), [args.scenario], args.seed)
    rows = []
    for name in FRAMEWORKS:
        outcome = outcomes[name]
        for sid in sorted(outcome.report.per_shipper_mean):
            mean = outcome.report.per_shipper_mean[sid]
            rows.append([name, sid, frac_str(mean), money_str(mean),
                         repr(outcome.report.per_shipper_stderr[sid])])
    bundle.add_csv("compare.csv",
                   ["framework", "shipper", "mean_cost", "mean_cost_money",
                    "std_error"], rows)
    bundle.add_csv("structures.csv", ["framework", "structure"],
                   ([name, outcomes[name].structure.label()] for name in FRAMEWORKS))
    bundle.write()
    return EXIT_OK


def _patched(scenario: DeliveryScenario, param: str, value: Fraction) -> DeliveryScenario:
    cp = scenario.costs
    if param == "outsource_penalty":
        costs = CostParams(cp.routing_rate, cp.transfer_cost, value, value, cp.big_m)
        return DeliveryScenario(scenario.shippers, scenario.customers,
                                scenario.drones, costs)
    if param == "transfer_cost":
        costs = CostParams(cp.routing_rate, value, cp.outsource_cost,
                           cp.penalty_cost, cp.big_m)
        return DeliveryScenario(scenario.shippers, scenario.customers,
                                scenario.drones, costs)
    if param in ("breakdown_prob", "initial_cost"):
        drones = tuple(
            Drone(d.id, d.home_shipper, d.capacity, d.trip_range, d.daily_range,
                  d.shift_hours, d.speed,
                  value if param == "breakdown_prob" else d.breakdown_prob,
                  value if param == "initial_cost" else d.initial_cost)
            for d in scenario.drones)
        return DeliveryScenario(scenario.shippers, scenario.customers,
                                drones, scenario.costs)
    raise InputError(f"unknown sweep parameter {param!r}")


def cmd_sweep(args) -> int:
    doc = _load(args.scenario)
    mode = _mode(args.mode)
    try:
        values = [frac(v) for v in args.values.split(",") if v.strip()]
    except (ValueError, TypeError):
        raise InputError(f"bad --values {args.values!r}")
    if not values:
        raise InputError("--values must list at least one number")
    coalition = _coalition(args.coalition) if args.coalition else \
        Coalition(doc.scenario.shipper_ids())
    _check_members(doc.scenario, coalition.members)
    rows = []
    for value in values:
        patched = _patched(doc.scenario, args.param, value)
        sol = solve_assignment(patched, coalition, mode)
        served = sum(sol.served_count.values())
        rows.append([
            args.param, frac_str(value), frac_str(sol.objective),
            money_str(sol.objective),
            sum(sol.use_drone.values()), served,
            sum(sol.outsourced.values()),
            sum(v for v in sol.transfer.values())])
        if args.stable:
            result = merge_split(patched, doc.beliefs, mode=mode)
            rows[-1].append(result.structure.label())
    header = ["param", "value", "objective", "objective_money", "drones_used",
              "served", "outsourced", "transferred"]
    if args.stable:
        header.append("stable_structure")
    bundle = Bundle(args.out, "sweep", vars_of(args), [args.scenario], None)
    bundle.add_csv("sweep.csv", header, rows)
    bundle.write()
    return EXIT_OK


# --- wiring ---------------------------------------------------------------


def vars_of(args) -> dict:
    skip = {"func"}
    return {k: v for k, v in vars(args).items() if k not in skip and v is not None}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="droneplan",
        description="Cooperative drone delivery planning toolkit")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p, seed=False, jobs=False, mode=False, out=True):
        p.add_argument("--scenario", required=True, help="scenario JSON path")
        if out:
            p.add_argument("--out", "-o", required=True, help="output directory")
        if mode:
            p.add_argument("--mode", default="stochastic",
                           help="deterministic|stochastic (default stochastic)")
        if seed:
            p.add_argument("--seed", type=int, default=0)
        if jobs:
            p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                           help="max concurrent coalition solves")

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solomon", help="synthesize a scenario from a Solomon file")
    p.add_argument("--input", required=True, help="Solomon format text file")
    p.add_argument("--out", "-o", required=True)
    p.add_argument("--depots", help="4 comma-separated row ids to become depots")
    p.add_argument("--customers", type=int, help="number of customers to keep")
    p.add_argument("--coord-scale", default="0.1")
    p.add_argument("--weight-scale", default="0.1")
    p.add_argument("--belief", default="0.9")
    p.add_argument("--breakdown-prob", dest="breakdown_prob")
    p.add_argument("--initial-cost", dest="initial_cost")
    p.add_argument("--routing-rate", dest="routing_rate")
    p.add_argument("--transfer-cost", dest="transfer_cost")
    p.add_argument("--outsource-cost", dest="outsource_cost")
    p.add_argument("--penalty-cost", dest="penalty_cost")
    p.set_defaults(func=cmd_solomon)

    p = sub.add_parser("assign", help="solve one coalition's package assignment")
    add_common(p, mode=True)
    p.add_argument("--coalition", required=True, help='e.g. "p1,p3"')
    p.set_defaults(func=cmd_assign)

    p = sub.add_parser("shapley", help="cost shares for a coalition structure")
    add_common(p, mode=True, jobs=True)
    p.add_argument("--structure", required=True, help='e.g. "p1,p2|p3,p4"')
    p.set_defaults(func=cmd_shapley)

    p = sub.add_parser("coalition", help="merge-and-split to a stable structure")
    add_common(p, mode=True, jobs=True)
    p.add_argument("--initial", help="starting structure (default: singletons)")
    p.set_defaults(func=cmd_coalition)

    p = sub.add_parser("markov", help="stationary distribution over structures")
    add_common(p, mode=True, jobs=True)
    p.add_argument("--alpha", default="0.5", help="per-shipper change probability")
    p.add_argument("--epsilon", default="0.1", help="preferred-move case weight")
    p.add_argument("--emit-q", action="store_true", help="also write transitions.csv")
    p.set_defaults(func=cmd_markov)

    p = sub.add_parser("dynamic", help="iterated belief learning")
    add_common(p, mode=True, seed=True)
    p.add_argument("--truth", default="", help='misbehavior rates "p3=0.25,p4=0.25"')
    p.add_argument("--error-prob", default="0.05", dest="error_prob")
    p.add_argument("--w1", default="0.5")
    p.add_argument("--w2", default="0.5")
    p.add_argument("--iters", type=int, default=20)
    p.add_argument("--initial-belief", dest="initial_belief",
                   help="override the scenario belief matrix with a uniform value")
    p.set_defaults(func=cmd_dynamic)

    p = sub.add_parser("simulate", help="Monte Carlo execution of a plan")
    add_common(p, mode=True, seed=True, jobs=True)
    p.add_argument("--structure", help="coalition structure (default: grand)")
    p.add_argument("--runs", type=int, default=10000)
    p.add_argument("--misbehavior", default="")
    p.add_argument("--events", action="store_true", help="write events.json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="simulate DDD/SDD/CoDDD/CoSDD/BCoSDD")
    add_common(p, seed=True, jobs=True)
    p.add_argument("--runs", type=int, default=10000)
    p.add_argument("--misbehavior", default="")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="objective sweep over one parameter")
    add_common(p, mode=True)
    p.add_argument("--param", required=True,
                   choices=["outsource_penalty", "transfer_cost",
                            "breakdown_prob", "initial_cost"])
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--coalition", help="coalition to solve (default: all shippers)")
    p.add_argument("--stable", action="store_true",
                   help="also report the merge-split stable structure")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("DRONEPLAN_LOG", "WARNING"))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (AssignmentError, ShapleySizeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
