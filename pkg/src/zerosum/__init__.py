"""Approximate Nash equilibria of zero-sum matrix games by sample-based
optimistic multiplicative weights, with exact, perturbed and simulated
quantum multi-Gibbs sampling oracles."""

from .game import (GameError, GameMatrix, RegretDiagnostics, SimplexVector, load_matrix_csv,
                   nash_gap, pad_to_square, rescale_game, save_matrix_csv, total_regret)
from .ftrl import (FtrlState, ftrl_step, negative_entropy, opt_ftrl_play, opt_ftrl_solve,
                   rvu_check)
from .oracles import (CostModel, ExactOracle, GibbsRequest, MultiGibbsPlan, NoisyOracle,
                      QuantumSimOracle, QueryLedger, build_multi_gibbs_plan, consistent_estimate,
                      exact_sample, gibbs_distribution, k_max_find, make_oracle,
                      multi_gibbs_sample, noisy_sample, tv_distance)
from .polyapprox import ExpApproximant, build_exp_approximant, evaluate
from .solver import (SolverConfig, SolverState, pomwu_round, pomwu_solve, regret_bound_exact,
                     regret_bound_noisy)

__version__ = "0.1.0"
