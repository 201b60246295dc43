"""Prediction-augmented GP-UCB: a two-oracle Gaussian-process bandit optimizer."""
from .acquisition import BetaSchedule, beta_t, pa_mean, pa_std, select_next, ucb_score
from .algorithms import RegretTrace, RunConfig, regret, run, run_naive, run_pa_gp_ucb, run_vanilla_gp_ucb
from .errors import InputError, NumericalError, OracleError, ParseError, RemoteOracleError
from .gp_core import Domain, KernelSpec, chol_solve, gram, reference_posterior
from .joint_model import BivariateSummary, JointModel, NoiseSpec, TaskCoupling
from .offline_design import NetDesign, epsilon_net, estimate_r_hat, sigma_min_ml_sq, sufficient_design

__version__ = "0.1.0"
