"""Tabulated environments exposing a noisy truth oracle and a noisy prediction oracle."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import InputError, OracleError, RemoteOracleError
from ..gp_core import Domain, KernelSpec, as_points, gp_posterior
from .arms import ArmTable, load_arm_table, load_predictions, planted_predictor, standardize
from .remote import PredictionCache, remote_prediction
from .synthetic import GroundPair, apply_sign_flip, sample_synthetic_pair

KINDS = ("synthetic", "finite_arm", "embedded_grid")


@dataclass(frozen=True)
class EnvironmentSpec:
    """What to build; fields not belonging to ``kind`` must stay at their defaults.

    ``eta_sq``/``eta_ml_sq`` left as ``None`` inherit the run's model noise.
    ``rho`` is the generative correlation of synthetic pairs (``None``: the run's
    coupling). ``planted_rho`` builds a planted predictor for arm-based kinds
    when no ``prediction_path`` or ``remote_endpoint`` is given.
    """

    kind: str = "synthetic"
    domain: Domain = Domain()
    seed: int = 0
    eta_sq: Optional[float] = None
    eta_ml_sq: Optional[float] = None
    grid_size: int = 512
    rho: Optional[float] = None
    sign_flip: Optional[tuple] = None
    arm_table_path: Optional[str] = None
    prediction_path: Optional[str] = None
    planted_rho: Optional[float] = None
    planted_seed: int = 0
    remote_endpoint: Optional[str] = None
    remote_template: str = "scale_only"
    remote_cache: Optional[str] = None
    fit_noise: float = 0.01
    standardize: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown environment kind {self.kind!r}")
        arm_fields = ("arm_table_path", "prediction_path", "planted_rho", "remote_endpoint", "remote_cache")
        if self.kind == "synthetic":
            stray = [f for f in arm_fields if getattr(self, f) is not None]
            if stray:
                raise InputError(f"synthetic environments take no {stray}")
        else:
            if self.arm_table_path is None:
                raise InputError(f"{self.kind} environments need arm_table_path")
            if self.sign_flip is not None or self.rho is not None:
                raise InputError(f"{self.kind} environments take no sign_flip/rho")
        if self.sign_flip is not None:
            iv = np.asarray(self.sign_flip, dtype=float).reshape(-1, 2)
            lo, hi = iv[:, 0], iv[:, 1]
            nonempty = lo <= hi
            if np.any(nonempty & ((lo < 0) | (hi > self.domain.side))):
                raise InputError("sign_flip interval must lie within the box")


class Environment:
    """An immutable tabulated environment.

    ``candidates`` is the support of both oracles (the acquisition grid or the
    arm embeddings); ``ground`` holds the reward tables on that support.
    """

    def __init__(self, spec: EnvironmentSpec, ground: GroundPair, eta_sq: float, eta_ml_sq: float,
                 arms: ArmTable | None = None, failures=()):
        if eta_sq < 0 or eta_ml_sq < 0:
            raise InputError("oracle noise variances must be nonnegative")
        self.spec = spec
        self.ground = ground
        self.eta_sq = float(eta_sq)
        self.eta_ml_sq = float(eta_ml_sq)
        self.arms = arms
        self.failures = tuple(failures)

    @property
    def candidates(self):
        return self.ground.grid

    @property
    def dim(self):
        return self.ground.grid.shape[1]

    def locate(self, x) -> int:
        x = as_points(x, self.dim)[0]
        hit = np.flatnonzero(np.all(np.abs(self.candidates - x) <= 1e-12, axis=1))
        if hit.size == 0:
            raise InputError(f"point {x} is not in the environment support")
        return int(hit[0])

    def query_index(self, i: int, which: str, rng: np.random.Generator) -> float:
        if which == "truth":
            base, var = self.ground.f_table[i], self.eta_sq
        elif which == "prediction":
            base, var = self.ground.f_ml_table[i], self.eta_ml_sq
        else:
            raise InputError(f"which must be 'truth' or 'prediction', got {which!r}")
        value = float(base + np.sqrt(var) * rng.standard_normal())
        if not np.isfinite(value):
            raise OracleError(f"{which} oracle returned a non-finite value at index {i}")
        return value

    def query(self, x, which: str, rng: np.random.Generator) -> float:
        return self.query_index(self.locate(x), which, rng)


def query(env: Environment, x, which: str, rng) -> float:
    return env.query(x, which, rng)


def _arm_predictions(spec: EnvironmentSpec, table: ArmTable):
    """Predicted reward per arm plus the ids whose remote query failed."""
    failures = []
    if spec.prediction_path is not None:
        return load_predictions(spec.prediction_path, table), failures
    if spec.remote_endpoint is not None:
        cache = PredictionCache(spec.remote_cache) if spec.remote_cache else None
        r = table.mean_rewards
        preds = np.full(len(table), np.nan)
        for i, (arm_id, text) in enumerate(zip(table.arm_ids, table.texts)):
            fill = {"arm_text": text, "y_min": float(r.min()), "y_max": float(r.max()), "y_mean": float(r.mean())}
            try:
                preds[i] = remote_prediction(spec.remote_endpoint, spec.remote_template, fill, cache=cache)
            except RemoteOracleError as exc:
                failures.append((arm_id, str(exc)))
        if failures:
            # failed arms fall back to the mean of the successful predictions
            ok = np.isfinite(preds)
            preds[~ok] = preds[ok].mean() if ok.any() else 0.0
        return preds, failures
    if spec.planted_rho is None:
        raise InputError("arm environments need prediction_path, remote_endpoint or planted_rho")
    return planted_predictor(table.mean_rewards, spec.planted_rho, spec.planted_seed), failures


def build_environment(spec: EnvironmentSpec, kernel: KernelSpec, rho: float, eta_sq: float, eta_ml_sq: float) -> Environment:
    """Tabulate the environment described by ``spec``.

    ``rho``, ``eta_sq`` and ``eta_ml_sq`` are run-level fallbacks for the
    corresponding ``None`` fields of ``spec``.
    """
    eta_sq = spec.eta_sq if spec.eta_sq is not None else eta_sq
    eta_ml_sq = spec.eta_ml_sq if spec.eta_ml_sq is not None else eta_ml_sq
    if spec.kind == "synthetic":
        grid = spec.domain.grid(spec.grid_size)
        pair = sample_synthetic_pair(kernel, spec.rho if spec.rho is not None else rho, grid, spec.seed)
        if spec.sign_flip is not None:
            iv = np.asarray(spec.sign_flip, dtype=float)
            pair = apply_sign_flip(pair, iv if iv.size == 2 else iv.reshape(-1, 2))
        return Environment(spec, pair, eta_sq, eta_ml_sq)

    table = load_arm_table(spec.arm_table_path)
    preds, failures = _arm_predictions(spec, table)
    f = standardize(table.mean_rewards) if spec.standardize else table.mean_rewards
    f_ml = standardize(preds) if spec.standardize else preds
    if spec.kind == "finite_arm":
        return Environment(spec, GroundPair(table.embeddings, f, f_ml), eta_sq, eta_ml_sq, table, failures)

    if table.dim != spec.domain.dim:
        raise InputError(f"arm embeddings are {table.dim}-D but the domain is {spec.domain.dim}-D")
    grid = spec.domain.grid(spec.grid_size)
    f_grid, _ = gp_posterior(kernel, table.embeddings, f, spec.fit_noise, grid)
    f_ml_grid, _ = gp_posterior(kernel, table.embeddings, f_ml, spec.fit_noise, grid)
    return Environment(spec, GroundPair(grid, f_grid, f_ml_grid), eta_sq, eta_ml_sq, table, failures)
