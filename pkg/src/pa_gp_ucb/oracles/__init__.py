"""Oracles and the environments that host them."""
from .arms import ArmTable, load_arm_table, planted_predictor
from .environment import Environment, EnvironmentSpec, build_environment, query
from .remote import PredictionCache, remote_prediction, render_prompt
from .synthetic import GroundPair, apply_sign_flip, sample_synthetic_pair

__all__ = [
    "ArmTable", "Environment", "EnvironmentSpec", "GroundPair", "PredictionCache",
    "apply_sign_flip", "build_environment", "load_arm_table", "planted_predictor",
    "query", "remote_prediction", "render_prompt", "sample_synthetic_pair",
]
