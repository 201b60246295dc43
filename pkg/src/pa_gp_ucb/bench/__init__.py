"""Ensembles, theory evaluators, readback and I/O for the regret benchmark."""
from .ensemble import EnsembleResult, SeriesAggregate, aggregate, run_ensemble, seed_config
from .readback import Neighbor, nearest_arms
from .theory import (BoundReport, TheoryConstants, estimate_rho_hat, info_gain, info_gain_greedy, ratio_factor,
                     regret_bound, theory_constants)
