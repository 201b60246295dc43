"""Run loops for PA-GP-UCB, Vanilla GP-UCB and the two uncorrected baselines.

Every run draws randomness from four independent streams spawned from the
run seed (offline predictions, online truth, online predictions, random
initialisation), so runs of different algorithms with the same seed see the
same noise sequence for a given sequence of queries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .acquisition import BetaSchedule, argmax_first, pa_mean, pa_std
from .errors import InputError, OracleError
from .gp_core import KernelSpec, as_points, gp_posterior
from .joint_model import JointModel, NoiseSpec, TaskCoupling
from .offline_design import NetDesign, snap_to_grid
from .oracles.environment import Environment, EnvironmentSpec, build_environment
from .oracles.synthetic import GroundPair

ALGORITHMS = ("pa", "vanilla", "naive_offline", "naive_offline_online")


@dataclass(frozen=True)
class RunConfig:
    env: EnvironmentSpec = EnvironmentSpec()
    kernel: KernelSpec = KernelSpec()
    coupling: TaskCoupling = TaskCoupling()
    noise: NoiseSpec = NoiseSpec()
    horizon: int = 200
    net: Optional[NetDesign] = None
    beta: BetaSchedule = BetaSchedule()
    algorithm: str = "pa"
    seed: int = 0
    random_init: bool = False

    def __post_init__(self):
        if self.horizon < 1:
            raise InputError("horizon must be at least 1")
        if self.algorithm not in ALGORITHMS:
            raise InputError(f"unknown algorithm {self.algorithm!r}")

    def replace(self, **changes) -> "RunConfig":
        return replace(self, **changes)


@dataclass
class RegretTrace:
    """Per-round record of a run. ``failure`` is set when a run stopped early."""

    algorithm: str
    seed: int
    indices: np.ndarray
    x: np.ndarray
    y: np.ndarray
    y_ml: np.ndarray
    f_x: np.ndarray
    inst_regret: np.ndarray
    cum_regret: np.ndarray
    run_id: str = ""
    failure: Optional[str] = None
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.indices)

    @property
    def final_regret(self) -> float:
        return float(self.cum_regret[-1]) if len(self) else 0.0


def regret(x_seq, ground: GroundPair):
    """Instantaneous and cumulative regret of a query sequence, by table lookup."""
    X = as_points(x_seq, ground.grid.shape[1]) if np.size(x_seq) else np.zeros((0, ground.grid.shape[1]))
    idx = []
    for x in X:
        hit = np.flatnonzero(np.all(np.abs(ground.grid - x) <= 1e-12, axis=1))
        if hit.size == 0:
            raise InputError(f"point {x} is not on the evaluation grid")
        idx.append(hit[0])
    r = ground.f_star - ground.f_table[np.array(idx, dtype=int)]
    return r, float(r.sum())


class RunStreams:
    def __init__(self, seed):
        ss = np.random.SeedSequence(int(seed))
        self.offline, self.truth, self.prediction, self.init = (np.random.default_rng(s) for s in ss.spawn(4))


def offline_support(env: Environment, net: NetDesign | None):
    """Indices into the environment support where offline predictions are collected.

    Finite-arm environments use every arm; gridded ones snap the net centers to
    the nearest grid point (duplicates merge).
    """
    if net is None or net.replication < 1:
        return np.zeros(0, dtype=int)
    if env.spec.kind == "finite_arm":
        return np.arange(len(env.candidates))
    return snap_to_grid(net.centers, env.candidates)


def _collect_offline(model: JointModel, env: Environment, net, streams: RunStreams):
    for i in offline_support(env, net):
        obs = [env.query_index(int(i), "prediction", streams.offline) for _ in range(net.replication)]
        model.observe_offline(env.candidates[i], obs)


class _Scorer:
    """Acquisition for one algorithm; keeps per-run diagnostics."""

    def __init__(self, cfg: RunConfig, env: Environment):
        self.cfg = cfg
        self.algorithm = cfg.algorithm
        self.model = JointModel(cfg.kernel, cfg.coupling, cfg.noise, dim=env.dim)
        self.diag = {"max_pa_excess": -math.inf, "max_aug_excess": -math.inf, "r_hat": 0.0}

    def scores(self, cands, beta):
        m, alg = self.model, self.algorithm
        if alg == "vanilla":
            rounds = m.online_rounds
            X = np.array([x for x, _, _ in rounds]).reshape(len(rounds), m.dim)
            y = np.array([yy for _, yy, _ in rounds])
            mu, var = gp_posterior(m.kernel, X, y, m.noise.eta_sq, cands)
            return mu + math.sqrt(beta) * np.sqrt(var)
        if alg == "naive_offline":
            mu, sd = m.true_marginal(cands, offline=True, online_ml=False)
            return mu + math.sqrt(beta) * sd
        if alg == "naive_offline_online":
            mu, sd = m.true_marginal(cands, offline=True, online_ml=True)
            return mu + math.sqrt(beta) * sd
        s = m.summary(cands)
        sd_pa = pa_std(s)
        d = self.diag
        d["max_pa_excess"] = max(d["max_pa_excess"], float(np.max(sd_pa - s.sigma_true)))
        d["max_aug_excess"] = max(d["max_aug_excess"], float(np.max(s.sigma_ml_all - s.sigma_ml)))
        if m.offline_entries:
            ok = s.sigma_ml >= m.rho_tol
            if ok.any():
                ratio = np.clip(s.sigma_ml_all[ok] / s.sigma_ml[ok], 0.0, 1.0) ** 2
                d["r_hat"] = max(d["r_hat"], float(ratio.max()))
        else:
            d["r_hat"] = 1.0
        return pa_mean(s) + math.sqrt(beta) * sd_pa


def run(cfg: RunConfig, env: Environment | None = None) -> RegretTrace:
    """Execute one seeded run of ``cfg.algorithm`` and return its trace."""
    if env is None:
        env = build_environment(cfg.env, cfg.kernel, cfg.coupling.rho, cfg.noise.eta_sq, cfg.noise.eta_ml_sq)
    if cfg.algorithm != "vanilla" and cfg.net is None and cfg.env.kind != "finite_arm":
        raise InputError(f"{cfg.algorithm} needs an offline net design")
    streams = RunStreams(cfg.seed)
    scorer = _Scorer(cfg, env)
    cands = env.candidates
    r = cfg.env.domain.side
    failure = None
    if cfg.algorithm != "vanilla":
        try:
            _collect_offline(scorer.model, env, cfg.net, streams)
        except OracleError as exc:
            failure = f"offline: {exc}"
    idx, ys, yms = [], [], []
    init_choice = int(streams.init.integers(len(cands))) if cfg.random_init else None
    for t in range(1, cfg.horizon + 1):
        if failure:
            break
        if t == 1 and init_choice is not None:
            i = init_choice
        else:
            i = argmax_first(scorer.scores(cands, cfg.beta(t, env.dim, r)))
        try:
            y = env.query_index(i, "truth", streams.truth)
            y_ml = env.query_index(i, "prediction", streams.prediction)
        except OracleError as exc:
            failure = f"round {t}: {exc}"
            break
        scorer.model.observe_online(cands[i], y, y_ml)
        idx.append(i)
        ys.append(y)
        yms.append(y_ml)
    idx = np.array(idx, dtype=int)
    f_x = env.ground.f_table[idx]
    inst = env.ground.f_star - f_x
    diag = scorer.diag if cfg.algorithm == "pa" else {}
    return RegretTrace(
        algorithm=cfg.algorithm, seed=cfg.seed, indices=idx, x=cands[idx], y=np.array(ys), y_ml=np.array(yms),
        f_x=f_x, inst_regret=inst, cum_regret=np.cumsum(inst), run_id=f"{cfg.algorithm}-{cfg.seed}",
        failure=failure, diagnostics=dict(diag),
    )


def _checked(cfg, allowed):
    if cfg.algorithm not in allowed:
        raise InputError(f"config algorithm is {cfg.algorithm!r}, expected one of {allowed}")
    return cfg


def run_pa_gp_ucb(cfg: RunConfig, env: Environment | None = None) -> RegretTrace:
    return run(_checked(cfg, ("pa",)), env)


def run_vanilla_gp_ucb(cfg: RunConfig, env: Environment | None = None) -> RegretTrace:
    return run(_checked(cfg, ("vanilla",)), env)


def run_naive(cfg: RunConfig, env: Environment | None = None) -> RegretTrace:
    return run(_checked(cfg, ("naive_offline", "naive_offline_online")), env)


def make_environment(cfg: RunConfig) -> Environment:
    return build_environment(cfg.env, cfg.kernel, cfg.coupling.rho, cfg.noise.eta_sq, cfg.noise.eta_ml_sq)
