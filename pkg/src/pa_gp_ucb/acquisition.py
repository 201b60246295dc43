"""Control-variates mean/std, the confidence schedule and UCB argmax selection."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InputError
from .joint_model import BivariateSummary, JointModel


def pa_mean(s: BivariateSummary):
    """Bias-corrected true-task mean.

    ``mu_true - rho_t * sigma_true / sigma_ml * (mu_ml - mu_ml_all)``; wherever
    the posterior correlation was zeroed by the degeneracy guard the correction
    vanishes and ``mu_true`` is returned as is.
    """
    rho = np.asarray(s.rho_t, dtype=float)
    sd_ml = np.asarray(s.sigma_ml, dtype=float)
    live = (rho != 0.0) & (sd_ml > 0.0)
    coef = np.where(live, rho * np.asarray(s.sigma_true) / np.where(live, sd_ml, 1.0), 0.0)
    out = np.asarray(s.mu_true) - coef * (np.asarray(s.mu_ml) - np.asarray(s.mu_ml_all))
    return out if out.ndim else float(out)


def pa_std(s: BivariateSummary):
    """Standard deviation of the bias-corrected estimator; never above ``sigma_true``."""
    rho = np.asarray(s.rho_t, dtype=float)
    sd_ml = np.asarray(s.sigma_ml, dtype=float)
    ratio = np.divide(s.sigma_ml_all, sd_ml, out=np.ones_like(sd_ml), where=sd_ml > 0)
    ratio = np.clip(ratio, 0.0, 1.0)
    bracket = rho**2 * ratio**2 + 1.0 - rho**2
    out = np.asarray(s.sigma_true) * np.sqrt(np.maximum(bracket, 0.0))
    return out if out.ndim else float(out)


def beta_t(t, d=1, delta=0.1, a=1.0, b=1.0, r=1.0) -> float:
    """Confidence-width schedule ``2 log(2 pi^2 t^2 / (3 delta)) + 4 d log(d t b r sqrt(log(4 d a / delta)))``."""
    if t < 1 or d < 1:
        raise InputError("t and d must be at least 1")
    if not 0 < delta < 1:
        raise InputError("delta must lie in (0, 1)")
    if min(a, b, r) <= 0:
        raise InputError("a, b and r must be positive")
    inner = 4 * d * a / delta
    if inner <= 1:
        raise InputError(f"log(4da/delta) must be positive (got 4da/delta = {inner:.4g}); use a larger a or smaller delta")
    return 2 * math.log(2 * math.pi**2 * t**2 / (3 * delta)) + 4 * d * math.log(d * t * b * r * math.sqrt(math.log(inner)))


@dataclass(frozen=True)
class BetaSchedule:
    """Either the theoretical schedule (``mode='theoretical'``) or a constant ``value``."""

    mode: str = "theoretical"
    delta: float = 0.1
    a: float = 1.0
    b: float = 1.0
    value: float = 2.0

    def __post_init__(self):
        if self.mode not in ("theoretical", "fixed"):
            raise InputError(f"unknown beta mode {self.mode!r}")
        if self.mode == "fixed" and not self.value > 0:
            raise InputError("fixed beta must be positive")

    def __call__(self, t, d=1, r=1.0):
        if self.mode == "fixed":
            return float(self.value)
        return beta_t(t, d, self.delta, self.a, self.b, r)


def ucb_score(s: BivariateSummary, beta: float):
    if not beta > 0:
        raise InputError("beta must be positive")
    return pa_mean(s) + math.sqrt(beta) * pa_std(s)


class Selection(NamedTuple):
    index: int
    point: np.ndarray
    score: float


def argmax_first(scores) -> int:
    """Index of the largest score, lowest index on ties."""
    scores = np.asarray(scores, dtype=float)
    if scores.size == 0:
        raise InputError("no candidates to select from")
    return int(np.flatnonzero(scores == scores.max())[0])


def select_next(model: JointModel, candidates, t, schedule: BetaSchedule = BetaSchedule(), r=1.0) -> Selection:
    """Maximise the prediction-augmented UCB over a finite candidate set."""
    candidates = np.asarray(candidates, dtype=float)
    if candidates.size == 0:
        raise InputError("empty candidate list")
    s = model.summary(candidates)
    scores = ucb_score(s, schedule(t, model.dim, r))
    i = argmax_first(scores)
    return Selection(i, candidates.reshape(len(scores), -1)[i], float(scores[i]))
