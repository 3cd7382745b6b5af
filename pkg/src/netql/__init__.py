"""Q-learning dynamics on network polymatrix games."""

from .errors import DomainError, NumericalError, StructureError
from .games import (Edge, ExplorationRates, JointStrategy, NetworkGame,
                    game_from_dict, game_to_dict, load_game, payoff,
                    perturbed_payoff, pseudo_gradient, reward_vector,
                    save_game)
from .catalog import (RandomGameSpec, TopologySpec, chakraborty_game,
                      make_network, mismatching_game, random_game, sato_game,
                      shapley_game)
from .spectral import (StabilityReport, identical_interest_intensity,
                       influence_bound, interaction_block_matrix,
                       is_pairwise_zero_sum, is_shared_bimatrix, op_norm_inf,
                       op_norm_one, op_norm_two, stability_report,
                       verify_block_norm_bound)
from .dynamics import (LearnerConfig, QState, Trajectory, boltzmann,
                       converged, euler_qld, q_step, qld_vector_field,
                       random_inits, run_q_learning)
from .equilibria import (epsilon_nash, equilibrium_report, exploitability,
                         lambert_w, qre_residual, surprisal_gap,
                         surprisal_gap_max)
from .annealing import AnnealHistory, AnnealParams, AnnealStep, anneal
from .harness import (SweepSpec, all_inits_converge, build_game, random_batch,
                      spread_report, stability_sweep, threshold_curves)

__version__ = "0.1.0"
