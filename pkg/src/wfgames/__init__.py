"""Water-filling power games on frequency-selective interference channels.

Nash equilibria by iterated water-filling, informed-leader (Stackelberg)
solutions by exhaustive search or a low-complexity dual method, duality
upper bounds, a Rayleigh channel ensemble, and a Monte-Carlo harness.
"""

from .channel import (ChannelRealization, ChannelTopology, NormalizedChannel,
                      RayleighProfile, SamplingError, generate_channel,
                      is_diagonally_dominant, normalize,
                      sample_admissible_channel, spectral_norms)
from .game import (ConvergenceError, EquilibriumResult, GameConfig,
                   follower_subgame_ne, iterative_waterfilling)
from .harness import (ExampleReport, ExperimentSpec, TrialRecord,
                      empirical_cdf, example_problem, reproduce_example,
                      run_experiment, summarize, write_cdf_csvs,
                      write_summary_json, write_trials_csv)
from .stackelberg import (EvaluationBudgetError, LeaderProblem,
                          StackelbergResult, algorithm1_dual, dual_bound,
                          dual_inner_maximum, dual_power_sums,
                          exhaustive_stackelberg, interference_free_bound,
                          lagrangian_value, leader_objective)
from .waterfill import (PowerAllocation, all_rates_normalized, best_response,
                        effective_noise, rate, rate_normalized,
                        waterfill_bisection, waterfill_closed_form,
                        waterfill_values)

__version__ = "0.1.0"
