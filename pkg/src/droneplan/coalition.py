"""Static Bayesian coalition formation over the shipper set.

Payoffs are expected delivery costs: a shipper's Shapley share plus, for each
partner it transfers packages to, the expected penalty of entrusting them to
a possibly-bad partner, weighted over the full lattice of belief
combinations.  A coalition is acceptable when no member pays more inside it
than it would pay alone; unacceptable coalitions evaluate to an INVALID
sentinel that never wins a comparison (payoffs are costs, so a literal zero
would look maximally attractive).

Two routes to a stable structure are provided: the merge-and-split local
search (one shipper moves at a time, guarded against re-entering a coalition
it already visited) and the Markov transition process over all coalition
structures, whose stationary distribution ranks structures by long-run
occupancy.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .costshare import CharacteristicCache, shapley
from .model import Coalition, CoalitionStructure, DeliveryScenario, all_structures
from .numeric import NumberLike, frac
from .program import Mode
from .solver import AssignmentSolution

GOOD = "G"
BAD = "B"


class BeliefMatrix:
    """Ordered-pair belief probabilities: lambda[p][q] = P(p believes q good)."""

    def __init__(self, entries: Mapping[tuple[str, str], NumberLike]):
        self._entries: dict[tuple[str, str], Fraction] = {}
        for (p, q), value in entries.items():
            if p == q:
                raise ValueError("belief matrix has no diagonal entries")
            v = frac(value)
            if not 0 <= v <= 1:
                raise ValueError(f"belief for ({p},{q}) must be in [0, 1]")
            self._entries[(p, q)] = v

    @staticmethod
    def uniform(shipper_ids: Iterable[str], value: NumberLike) -> "BeliefMatrix":
        ids = sorted(shipper_ids)
        return BeliefMatrix({(p, q): value for p in ids for q in ids if p != q})

    @staticmethod
    def all_good(shipper_ids: Iterable[str]) -> "BeliefMatrix":
        return BeliefMatrix.uniform(shipper_ids, 1)

    def get(self, p: str, q: str) -> Fraction:
        return self._entries.get((p, q), Fraction(1))

    def updated(self, changes: Mapping[tuple[str, str], Fraction]) -> "BeliefMatrix":
        merged = dict(self._entries)
        merged.update(changes)
        return BeliefMatrix(merged)

    def items(self):
        return sorted(self._entries.items())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, BeliefMatrix) and self._entries == other._entries


def transfer_counts(sol: AssignmentSolution) -> dict[tuple[str, str], int]:
    """Number of packages shipper p hands to shipper q in the plan."""
    members = sol.coalition.members
    counts = {(p, q): 0 for p in members for q in members if p != q}
    for (_, p, q), v in sol.transfer.items():
        if v and p != q:
            counts[(p, q)] += v
    return counts


def expected_payoff(p: str, coalition: Coalition, allocation: Mapping[str, Fraction],
                    beliefs: BeliefMatrix, theta: Mapping[tuple[str, str], int],
                    c_pen: Fraction) -> Fraction:
    """Expected delivery cost of shipper p inside the coalition.

    Enumerates all 2^(|S|-1) good/bad combinations of the partners.  A
    combination's probability is the product of per-partner belief terms; a
    bad partner q adds theta[p][q] * c_pen * (1 - lambda[p][q]).
    """
    if p not in coalition:
        raise ValueError(f"{p} not in coalition {coalition.label()}")
    base = Fraction(allocation[p])
    partners = [q for q in coalition.members if q != p]
    total = base
    for combo in itertools.product((GOOD, BAD), repeat=len(partners)):
        prob = Fraction(1)
        incurred = Fraction(0)
        for q, kind in zip(partners, combo):
            lam = beliefs.get(p, q)
            if kind == GOOD:
                prob *= lam
            else:
                prob *= 1 - lam
                incurred += theta.get((p, q), 0) * c_pen * (1 - lam)
        total += prob * incurred
    return total


def expected_payoff_factorized(p: str, coalition: Coalition,
                               allocation: Mapping[str, Fraction],
                               beliefs: BeliefMatrix,
                               theta: Mapping[tuple[str, str], int],
                               c_pen: Fraction) -> Fraction:
    """Independent per-partner form: v_p + sum_q (1-lambda_pq)^2 theta_pq c_pen."""
    total = Fraction(allocation[p])
    for q in coalition.members:
        if q == p:
            continue
        lam = beliefs.get(p, q)
        total += (1 - lam) ** 2 * theta.get((p, q), 0) * c_pen
    return total


class BayesianGame:
    """Scenario + beliefs + cached assignment costs = evaluable payoffs."""

    def __init__(self, scenario: DeliveryScenario, beliefs: BeliefMatrix,
                 mode: Mode = Mode.STOCHASTIC,
                 cache: CharacteristicCache | None = None):
        self.scenario = scenario
        self.beliefs = beliefs
        self.mode = mode
        self.cache = cache if cache is not None else CharacteristicCache(scenario, mode)
        if self.cache.mode is not mode:
            raise ValueError("cache mode does not match game mode")
        self._payoffs: dict[tuple[str, Coalition], Fraction] = {}

    def payoff(self, p: str, coalition: Coalition) -> Fraction:
        key = (p, coalition)
        hit = self._payoffs.get(key)
        if hit is not None:
            return hit
        allocation = shapley(self.cache, self.scenario, coalition).shares
        theta = transfer_counts(self.cache.solution(coalition))
        value = expected_payoff(p, coalition, allocation, self.beliefs, theta,
                                self.scenario.costs.penalty_cost)
        self._payoffs[key] = value
        return value

    def acceptable(self, coalition: Coalition) -> bool:
        """Every member pays no more inside than it would pay alone."""
        if len(coalition) == 1:
            return True
        return all(self.payoff(q, coalition) <= self.payoff(q, Coalition([q]))
                   for q in coalition)

    def preference_value(self, p: str, coalition: Coalition) -> Fraction | None:
        """Payoff when the coalition is acceptable, INVALID (None) otherwise."""
        if p not in coalition:
            raise ValueError(f"{p} not in coalition {coalition.label()}")
        if not self.acceptable(coalition):
            return None
        return self.payoff(p, coalition)


def prefers(new: Fraction | None, old: Fraction | None) -> bool:
    """Strict cost-minimizing comparison; INVALID never wins, ties stay put."""
    if new is None:
        return False
    if old is None:
        return True
    return new < old


def neighbors(structure: CoalitionStructure) -> list[CoalitionStructure]:
    """Structures reachable by exactly one shipper relocating, sorted."""
    found: set[CoalitionStructure] = set()
    blocks = list(structure.coalitions)
    for bi, block in enumerate(blocks):
        for mover in block.members:
            remainder = [c for i, c in enumerate(blocks) if i != bi]
            source_rest = [m for m in block.members if m != mover]
            # join each other coalition
            for ti in range(len(remainder)):
                new_blocks = [c for i, c in enumerate(remainder) if i != ti]
                new_blocks.append(remainder[ti].with_member(mover))
                if source_rest:
                    new_blocks.append(Coalition(source_rest))
                cand = CoalitionStructure(new_blocks)
                if cand != structure:
                    found.add(cand)
            # split off alone
            if source_rest:
                cand = CoalitionStructure(
                    remainder + [Coalition(source_rest), Coalition([mover])])
                if cand != structure:
                    found.add(cand)
    return sorted(found)


def movers_between(src: CoalitionStructure, dst: CoalitionStructure) -> list[str]:
    """Shippers whose single relocation turns src into dst (empty if none)."""
    out = []
    for p in src.shippers():
        if _move_of(src, p, dst) is not None:
            out.append(p)
    return out


def _move_of(src: CoalitionStructure, p: str,
             dst: CoalitionStructure) -> tuple[Coalition, Coalition] | None:
    """If relocating p alone maps src to dst, return (old, new) coalitions of p."""
    old = src.coalition_of(p)
    new = dst.coalition_of(p)
    if old == new:
        return None
    rest = [m for m in old.members if m != p]
    expect = [c for c in src.coalitions if c != old]
    if rest:
        expect.append(Coalition(rest))
    if len(new) == 1:
        expect.append(new)
    else:
        target = new.without(p)
        if target not in expect:
            return None
        expect = [c for c in expect if c != target]
        expect.append(new)
    return (old, new) if CoalitionStructure(expect) == dst else None


@dataclass(frozen=True)
class MergeSplitStep:
    index: int
    mover: str
    structure: CoalitionStructure  # structure after the accepted switch
    nu_before: Fraction | None
    nu_after: Fraction | None


@dataclass(frozen=True)
class MergeSplitResult:
    structure: CoalitionStructure
    trace: tuple[MergeSplitStep, ...]
    visited: dict[str, frozenset[Coalition]]


def merge_split(scenario: DeliveryScenario, beliefs: BeliefMatrix,
                initial: CoalitionStructure | None = None,
                mode: Mode = Mode.STOCHASTIC,
                cache: CharacteristicCache | None = None) -> MergeSplitResult:
    """Local search over coalition structures, one shipper move at a time.

    Starts from no cooperation (all singletons) unless an initial structure is
    given.  A move is accepted when the mover's preference value strictly
    improves; a shipper may never re-enter a multi-member coalition it has
    already been part of.  Iteration over candidate structures and movers is
    lexicographic, so runs are deterministic.
    """
    game = BayesianGame(scenario, beliefs, mode, cache)
    shipper_ids = scenario.shipper_ids()
    current = initial if initial is not None else CoalitionStructure.singletons(shipper_ids)
    visited: dict[str, set[Coalition]] = {p: set() for p in shipper_ids}
    for p in shipper_ids:
        visited[p].add(current.coalition_of(p))

    trace: list[MergeSplitStep] = []
    changed = True
    while changed:
        changed = False
        for candidate in neighbors(current):
            for p in shipper_ids:
                move = _move_of(current, p, candidate)
                if move is None:
                    continue
                old_c, new_c = move
                if new_c in visited[p] and len(new_c) > 1:
                    nu_new = None
                else:
                    nu_new = game.preference_value(p, new_c)
                nu_old = game.preference_value(p, old_c)
                if prefers(nu_new, nu_old):
                    current = candidate
                    visited[p].add(new_c)
                    trace.append(MergeSplitStep(len(trace) + 1, p, current,
                                                nu_old, nu_new))
                    changed = True
                    break
            if changed:
                break
    return MergeSplitResult(
        current, tuple(trace),
        {p: frozenset(v) for p, v in visited.items()})


def improving_moves(game: BayesianGame, structure: CoalitionStructure,
                    visited: Mapping[str, frozenset[Coalition]] | None = None,
                    ) -> list[tuple[str, CoalitionStructure]]:
    """Exhaustive single-deviation scan; used to certify stability."""
    out = []
    for candidate in neighbors(structure):
        for p in structure.shippers():
            move = _move_of(structure, p, candidate)
            if move is None:
                continue
            old_c, new_c = move
            if visited is not None and new_c in visited.get(p, frozenset()) \
                    and len(new_c) > 1:
                continue
            nu_new = game.preference_value(p, new_c)
            nu_old = game.preference_value(p, old_c)
            if prefers(nu_new, nu_old):
                out.append((p, candidate))
    return out


@dataclass(frozen=True)
class TransitionModel:
    states: tuple[CoalitionStructure, ...]
    matrix: tuple[tuple[Fraction, ...], ...]
    alpha: Fraction
    epsilon: Fraction


@dataclass(frozen=True)
class StationaryVector:
    pi: dict[CoalitionStructure, Fraction]

    def argmax(self) -> CoalitionStructure:
        return max(self.pi, key=lambda s: (self.pi[s], s.label()))


def transition_matrix(scenario: DeliveryScenario, beliefs: BeliefMatrix,
                      alpha: NumberLike, eps_mtp: NumberLike,
                      mode: Mode = Mode.STOCHASTIC,
                      cache: CharacteristicCache | None = None) -> TransitionModel:
    """Structure-to-structure transition probabilities.

    A neighbor transition involves the set of shippers whose single relocation
    produces it (one shipper usually; two when a pair merges from or splits
    into singletons, since either member generates the move).  With k involved
    shippers out of n, the base mass is alpha^k (1-alpha)^(n-k); it is scaled
    by eps_mtp when every involved shipper strictly prefers the target and by
    (1 - eps_mtp) otherwise.  Self-loops take the residual mass.
    """
    a = frac(alpha)
    eps = frac(eps_mtp)
    if not 0 < a < 1:
        raise ValueError("alpha must be strictly between 0 and 1")
    if not 0 <= eps <= 1:
        raise ValueError("eps_mtp must be in [0, 1]")
    game = BayesianGame(scenario, beliefs, mode, cache)
    states = tuple(all_structures(scenario.shipper_ids()))
    n = len(scenario.shippers)
    index = {s: i for i, s in enumerate(states)}
    size = len(states)
    rows: list[list[Fraction]] = [[Fraction(0)] * size for _ in range(size)]
    for i, src in enumerate(states):
        for dst in neighbors(src):
            j = index[dst]
            movers = movers_between(src, dst)
            beta = a ** len(movers) * (1 - a) ** (n - len(movers))
            all_prefer = True
            for b in movers:
                old_c, new_c = _move_of(src, b, dst)
                if not prefers(game.preference_value(b, new_c),
                               game.preference_value(b, old_c)):
                    all_prefer = False
                    break
            rows[i][j] = eps * beta if all_prefer else (1 - eps) * beta
        off_mass = sum(rows[i], Fraction(0))
        if off_mass > 1:
            raise ValueError(
                f"transition mass exceeds 1 in row {src.label()!r} ({off_mass})")
        rows[i][i] = 1 - off_mass
    return TransitionModel(states, tuple(tuple(r) for r in rows), a, eps)


def _terminal_classes(model: TransitionModel) -> list[list[int]]:
    """Strongly connected components with no outgoing edges (recurrent classes)."""
    size = len(model.states)
    adj = [[j for j in range(size) if model.matrix[i][j] > 0] for i in range(size)]
    order: list[int] = []
    seen = [False] * size
    for start in range(size):
        if seen[start]:
            continue
        stack = [(start, iter(adj[start]))]
        seen[start] = True
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if not seen[nxt]:
                    seen[nxt] = True
                    stack.append((nxt, iter(adj[nxt])))
                    advanced = True
                    break
            if not advanced:
                order.append(node)
                stack.pop()
    radj = [[] for _ in range(size)]
    for i in range(size):
        for j in adj[i]:
            radj[j].append(i)
    comp = [-1] * size
    comps: list[list[int]] = []
    for start in reversed(order):
        if comp[start] != -1:
            continue
        cid = len(comps)
        stack = [start]
        comp[start] = cid
        group = []
        while stack:
            node = stack.pop()
            group.append(node)
            for nxt in radj[node]:
                if comp[nxt] == -1:
                    comp[nxt] = cid
                    stack.append(nxt)
        comps.append(sorted(group))
    terminal = []
    for group in comps:
        inside = set(group)
        if all(j in inside for i in group for j in adj[i]):
            terminal.append(group)
    return terminal


def stationary_distribution(model: TransitionModel) -> StationaryVector:
    """Solve pi^T Q = pi^T with sum(pi) = 1.

    Requires a unique recurrent class; otherwise raises naming the
    disconnected classes.  Small chains are solved exactly in rationals;
    larger ones fall back to a dense float solve, then power iteration.
    """
    size = len(model.states)
    terminal = _terminal_classes(model)
    if len(terminal) > 1:
        names = ["{" + "; ".join(model.states[i].label() for i in group) + "}"
                 for group in terminal]
        raise ValueError(
            "stationary distribution is not unique; disconnected state classes: "
            + ", ".join(names))

    if size <= 64:
        pi = _stationary_exact(model.matrix, size)
    elif size <= 500:
        pi = _stationary_float(model.matrix, size)
    else:
        pi = _stationary_power(model.matrix, size)
    return StationaryVector({model.states[i]: pi[i] for i in range(size)})


def _stationary_exact(matrix, size: int) -> list[Fraction]:
    # rows of (Q^T - I), last equation replaced by normalization
    aug: list[list[Fraction]] = []
    for i in range(size):
        row = [matrix[j][i] - (1 if i == j else 0) for j in range(size)]
        row.append(Fraction(0))
        aug.append([Fraction(v) for v in row])
    aug[size - 1] = [Fraction(1)] * size + [Fraction(1)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if aug[r][col] != 0), None)
        if pivot is None:
            raise ValueError("singular stationary system")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(size):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [rv - factor * cv for rv, cv in zip(aug[r], aug[col])]
    return [aug[i][size] for i in range(size)]


def _stationary_float(matrix, size: int) -> list[Fraction]:
    a = np.array([[float(matrix[j][i]) for j in range(size)] for i in range(size)])
    a -= np.eye(size)
    a[-1, :] = 1.0
    b = np.zeros(size)
    b[-1] = 1.0
    pi = np.linalg.solve(a, b)
    pi = np.clip(pi, 0.0, None)
    fr = [Fraction(x) for x in pi]
    total = sum(fr, Fraction(0))
    return [x / total for x in fr]


def _stationary_power(matrix, size: int) -> list[Fraction]:
    q = np.array([[float(v) for v in row] for row in matrix])
    pi = np.full(size, 1.0 / size)
    for _ in range(200_000):
        nxt = pi @ q
        if np.max(np.abs(nxt - pi)) < 1e-14:
            pi = nxt
            break
        pi = nxt
    fr = [Fraction(max(x, 0.0)) for x in pi]
    total = sum(fr, Fraction(0))
    return [x / total for x in fr]
