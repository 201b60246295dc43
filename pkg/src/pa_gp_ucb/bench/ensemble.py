"""Seeded ensembles of runs and their per-round aggregates."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..algorithms import ALGORITHMS, RegretTrace, RunConfig, make_environment, run
from ..errors import InputError, NumericalError, OracleError


@dataclass
class SeriesAggregate:
    """Mean and standard error of ``R_t`` over the successful runs of one algorithm."""

    algorithm: str
    t: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    n_runs: int
    seeds: tuple
    final: np.ndarray

    @property
    def final_mean(self) -> float:
        return float(self.mean[-1]) if len(self.mean) else float("nan")

    @property
    def final_stderr(self) -> float:
        return float(self.stderr[-1]) if len(self.stderr) else float("nan")


@dataclass
class EnsembleResult:
    series: dict
    traces: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def final_regrets(self, algorithm) -> np.ndarray:
        return self.series[algorithm].final


def seed_config(cfg: RunConfig, seed: int, vary_env: bool = True) -> RunConfig:
    """The run config for one ensemble member; ``vary_env`` also reseeds the environment."""
    env = replace(cfg.env, seed=int(seed)) if vary_env else cfg.env
    return cfg.replace(seed=int(seed), env=env)


def _seed_task(cfg: RunConfig, seed: int, algorithms, vary_env: bool):
    scfg = seed_config(cfg, seed, vary_env)
    out = []
    try:
        env = make_environment(scfg)
    except (OracleError, NumericalError) as exc:
        return [(alg, seed, None, f"environment: {exc}") for alg in algorithms]
    for alg in algorithms:
        try:
            tr = run(scfg.replace(algorithm=alg), env)
            out.append((alg, seed, tr, tr.failure))
        except (OracleError, NumericalError) as exc:
            out.append((alg, seed, None, str(exc)))
    return out


def aggregate(traces: list[RegretTrace], algorithm: str, horizon: int) -> SeriesAggregate:
    """Per-round mean and standard error over complete traces (seed order is irrelevant)."""
    traces = sorted(traces, key=lambda tr: tr.seed)
    t = np.arange(1, horizon + 1)
    n = len(traces)
    if n == 0:
        nan = np.full(horizon, np.nan)
        return SeriesAggregate(algorithm, t, nan, nan.copy(), 0, (), np.zeros(0))
    R = np.stack([tr.cum_regret for tr in traces])
    se = R.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros(horizon)
    return SeriesAggregate(algorithm, t, R.mean(axis=0), se, n, tuple(tr.seed for tr in traces), R[:, -1].copy())


def run_ensemble(cfg: RunConfig, seeds, algorithms=ALGORITHMS, workers: int = 1, vary_env: bool = True,
                 keep_traces: bool = True) -> EnsembleResult:
    """Run every ``(algorithm, seed)`` pair and aggregate per algorithm.

    Failed or truncated runs are listed in ``failures`` and left out of the
    aggregate, whose ``n_runs`` counts the successes.
    """
    seeds = sorted(int(s) for s in seeds)
    if not seeds:
        raise InputError("need at least one seed")
    algorithms = tuple(algorithms)
    bad = [a for a in algorithms if a not in ALGORITHMS]
    if bad:
        raise InputError(f"unknown algorithms {bad}")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_seed_task, cfg, s, algorithms, vary_env) for s in seeds]
            rows = [r for f in futures for r in f.result()]
    else:
        rows = [r for s in seeds for r in _seed_task(cfg, s, algorithms, vary_env)]
    ok = {a: [] for a in algorithms}
    traces, failures = {}, []
    for alg, seed, tr, failure in rows:
        if tr is not None and keep_traces:
            traces[(alg, seed)] = tr
        if failure is not None:
            failures.append((alg, seed, failure))
        elif tr is not None:
            ok[alg].append(tr)
    series = {a: aggregate(ok[a], a, cfg.horizon) for a in algorithms}
    return EnsembleResult(series, traces, failures)
