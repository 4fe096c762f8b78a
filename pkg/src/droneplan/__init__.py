"""Cooperative drone delivery planning.

Exact package assignment under breakdown risk, Shapley cost sharing,
Bayesian coalition formation (static and dynamic), and seeded Monte Carlo
validation of plans.
"""

__version__ = "0.1.0"

from .model import (Coalition, CoalitionStructure, CostParams, Customer,
                    DeliveryScenario, Drone, Location, Shipper, all_structures,
                    bell_number, build_scenario, distance, parse_coalition,
                    parse_structure, validate_scenario)
from .penalty import expected_penalty, penalty_step
from .program import AssignmentError, Mode, build_program
from .solver import (AssignmentSolution, ObjectiveBreakdown,
                     brute_force_assignment, evaluate_objective,
                     solve_assignment)
from .costshare import (CharacteristicCache, CostAllocation, ShapleySizeError,
                        characteristic_cost, shapley, shapley_by_permutations,
                        shapley_values)
from .coalition import (BayesianGame, BeliefMatrix, MergeSplitResult,
                        StationaryVector, TransitionModel, expected_payoff,
                        expected_payoff_factorized, improving_moves,
                        merge_split, neighbors, stationary_distribution,
                        transfer_counts, transition_matrix)
from .dynamic import (IterationRecord, NoObservationError, ObservationRecord,
                      ema_update, outcome_probabilities, raw_belief,
                      run_dynamic)
from .sim import (FRAMEWORKS, FrameworkOutcome, SimConfig, SimReport,
                  compare_frameworks, simulate_plan)
from .ingest import (ParseError, ScenarioDocument, SolomonInstance,
                     SynthesisConfig, load_scenario, parse_solomon,
                     scenario_from_json, scenario_to_json,
                     synthesize_scenario)
