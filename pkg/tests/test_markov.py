import random
from fractions import Fraction

import pytest

from droneplan.coalition import (BeliefMatrix, StationaryVector, TransitionModel,
                                 merge_split, movers_between,
                                 stationary_distribution, transition_matrix)
from droneplan.model import all_structures, parse_structure
from droneplan.program import Mode

from conftest import cooperative_pair_scenario, random_scenario


def model_from_rows(labels, rows, alpha=Fraction(1, 2), eps=Fraction(1, 10)):
    states = tuple(parse_structure(lbl) for lbl in labels)
    matrix = tuple(tuple(Fraction(v) for v in row) for row in rows)
    return TransitionModel(states, matrix, alpha, eps)


def test_beta_mass_for_single_mover():
    # three shippers, single-mover transition: beta = 0.5 * 0.5^2
    sc = random_scenario(random.Random(1), 3, 2, 1)
    beliefs = BeliefMatrix.all_good([s.id for s in sc.shippers])
    model = transition_matrix(sc, beliefs, Fraction(1, 2), Fraction(1, 10))
    idx = {s.label(): i for i, s in enumerate(model.states)}
    src, dst = parse_structure("p1,p2|p3"), parse_structure("p1,p3|p2")
    assert movers_between(src, dst) == ["p1"]
    entry = model.matrix[idx[src.label()]][idx[dst.label()]]
    beta = Fraction(1, 2) * Fraction(1, 2) ** 2
    assert entry in (Fraction(1, 10) * beta, Fraction(9, 10) * beta)


def test_rows_sum_to_one_and_non_neighbors_zero():
    rng = random.Random(9)
    for n in (2, 3, 4):
        sc = random_scenario(rng, n, 3, 2, identical_drones=True)
        beliefs = BeliefMatrix.uniform([s.id for s in sc.shippers],
                                       Fraction(9, 10))
        model = transition_matrix(sc, beliefs, Fraction(1, 3), Fraction(1, 10))
        states = model.states
        for i, src in enumerate(states):
            assert sum(model.matrix[i], Fraction(0)) == 1
            for j, dst in enumerate(states):
                if i != j and not movers_between(src, dst):
                    assert model.matrix[i][j] == 0
                assert 0 <= model.matrix[i][j] <= 1


def test_stationary_doubly_stochastic_two_state():
    model = model_from_rows(["p1|p2", "p1,p2"],
                            [["1/2", "1/2"], ["1/2", "1/2"]])
    pi = stationary_distribution(model)
    assert list(pi.pi.values()) == [Fraction(1, 2), Fraction(1, 2)]


def test_stationary_two_state_balance():
    model = model_from_rows(["p1|p2", "p1,p2"],
                            [["0.9", "0.1"], ["0.5", "0.5"]])
    pi = stationary_distribution(model)
    values = {s.label(): v for s, v in pi.pi.items()}
    assert values == {"p1|p2": Fraction(5, 6), "p1,p2": Fraction(1, 6)}


def test_stationary_relabeling_invariance():
    rows = [["0.7", "0.2", "0.1"], ["0.3", "0.4", "0.3"], ["0.2", "0.2", "0.6"]]
    labels = ["p1|p2|p3", "p1,p2|p3", "p1,p2,p3"]
    base = stationary_distribution(model_from_rows(labels, rows))
    # permute states 0 and 2 consistently
    perm_rows = [[rows[2][2], rows[2][1], rows[2][0]],
                 [rows[1][2], rows[1][1], rows[1][0]],
                 [rows[0][2], rows[0][1], rows[0][0]]]
    permuted = stationary_distribution(
        model_from_rows([labels[2], labels[1], labels[0]], perm_rows))
    base_vals = {s.label(): v for s, v in base.pi.items()}
    perm_vals = {s.label(): v for s, v in permuted.pi.items()}
    assert base_vals == perm_vals


def test_stationary_exact_fixed_point():
    rng = random.Random(3)
    sc = random_scenario(rng, 3, 3, 2)
    beliefs = BeliefMatrix.uniform([s.id for s in sc.shippers], Fraction(4, 5))
    model = transition_matrix(sc, beliefs, Fraction(2, 5), Fraction(9, 10))
    pi = stationary_distribution(model)
    vec = [pi.pi[s] for s in model.states]
    assert sum(vec, Fraction(0)) == 1
    assert all(v >= 0 for v in vec)
    n = len(model.states)
    for j in range(n):
        recomputed = sum((vec[i] * model.matrix[i][j] for i in range(n)),
                         Fraction(0))
        assert recomputed == vec[j]  # exact solve: residual is literally zero


def test_reducible_chain_reports_classes():
    model = model_from_rows(["p1|p2", "p1,p2"], [["1", "0"], ["0", "1"]])
    with pytest.raises(ValueError, match="disconnected state classes"):
        stationary_distribution(model)
    model2 = model_from_rows(["p1|p2", "p1,p2"], [["1", "0"], ["1/2", "1/2"]])
    # unichain with a transient state is fine
    pi = stationary_distribution(model2)
    assert pi.pi[parse_structure("p1|p2")] == 1


def test_dominance_agreement_with_merge_split(coop_pair):
    beliefs = BeliefMatrix.uniform(["p1", "p2"], Fraction(9, 10))
    stable = merge_split(coop_pair, beliefs).structure
    assert stable.label() == "p1,p2"
    # literal transition semantics weight preferred moves by eps, so a
    # preference-following chain needs eps > 1/2
    model = transition_matrix(coop_pair, beliefs, Fraction(1, 2), Fraction(9, 10))
    pi = stationary_distribution(model)
    assert pi.argmax() == stable


def test_argmax_breaks_ties_deterministically():
    model = model_from_rows(["p1|p2", "p1,p2"],
                            [["1/2", "1/2"], ["1/2", "1/2"]])
    pi = stationary_distribution(model)
    assert pi.argmax() == parse_structure("p1|p2")  # label tie-break
