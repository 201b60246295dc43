"""Closed-form constants, regret bounds, information gain and the empirical correlation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from ..errors import InputError
from ..gp_core import KernelSpec, as_points, cholesky, gram
from ..joint_model import NoiseSpec

NO_GAIN_NOTE = "no gain when rho=0"


def ratio_factor(R: float, rho: float) -> float:
    """``sqrt(1 - (1 - R) rho^2)``: the factor the offline coverage buys in the bound."""
    if not 0 <= R <= 1:
        raise InputError("R must lie in [0, 1]")
    return math.sqrt(1.0 - (1.0 - R) * rho**2)


@dataclass(frozen=True)
class TheoryConstants:
    rho: float
    C1: float
    C2: float
    R_star: Optional[float]
    note: str = ""

    def ratio_factor(self, R: float) -> float:
        return ratio_factor(R, self.rho)


def theory_constants(rho: float, noise: NoiseSpec) -> TheoryConstants:
    """``C1``, ``C2`` and the break-even ratio ``R_star``.

    ``R_star`` is ``None`` when ``rho = 0``, where the correction has nothing to
    offer and the threshold is undefined.
    """
    if not abs(rho) < 1:
        raise InputError("C1 needs |rho| < 1")
    eta_sq, eta_ml_sq = noise.eta_sq, noise.eta_ml_sq
    eff = (eta_sq + rho**2 * eta_ml_sq) / (1 - rho**2)
    C1 = 8.0 / math.log1p(1.0 / eff)
    C2 = 8.0 / math.log1p(1.0 / eta_sq)
    if rho == 0:
        return TheoryConstants(rho, C1, C2, None, NO_GAIN_NOTE)
    R_star = min((C2 / C1 - (1 - rho**2)) / rho**2, 1.0)
    return TheoryConstants(rho, C1, C2, R_star)


class BoundReport(NamedTuple):
    pa: float
    vanilla: Optional[float]


def regret_bound(T, beta_T, C1, R, rho, gamma_T, C2=None) -> BoundReport:
    """PA bound ``sqrt(C1 beta_T T [1 - (1-R) rho^2] gamma_T) + pi^2/6`` and, given ``C2``, the Vanilla one."""
    for name, v in (("T", T), ("beta_T", beta_T), ("C1", C1), ("R", R), ("gamma_T", gamma_T)):
        if v < 0:
            raise InputError(f"{name} must be nonnegative")
    tail = math.pi**2 / 6
    bracket = 1.0 - (1.0 - R) * rho**2
    pa = math.sqrt(C1 * beta_T * T * bracket * gamma_T) + tail
    vanilla = None if C2 is None else math.sqrt(C2 * T * beta_T * gamma_T) + tail
    return BoundReport(pa, vanilla)


def info_gain(kernel: KernelSpec, sigma_sq: float, points) -> float:
    """``1/2 log det(I + K_A / sigma^2)`` for the given (possibly repeated) points."""
    if not sigma_sq > 0:
        raise InputError("sigma_sq must be positive")
    if np.size(points) == 0:
        return 0.0
    X = as_points(points)
    L, _ = cholesky(np.eye(len(X)) + gram(kernel, X) / sigma_sq)
    return float(np.sum(np.log(np.diag(L))))


def info_gain_greedy(kernel: KernelSpec, sigma_sq: float, grid, T: int, return_indices=False):
    """Greedy lower estimate of the maximal information gain over ``T`` distinct grid points.

    Each step adds the point with the largest posterior variance (equivalently
    the largest marginal gain), lowest index on ties.
    """
    G = as_points(grid)
    if T > len(G):
        raise InputError(f"T={T} exceeds the grid size {len(G)}")
    if not sigma_sq > 0:
        raise InputError("sigma_sq must be positive")
    var = np.full(len(G), kernel.signal_var, dtype=float)
    rows = []
    picked = []
    total = 0.0
    free = np.ones(len(G), dtype=bool)
    for _ in range(int(T)):
        masked = np.where(free, var, -np.inf)
        j = int(np.flatnonzero(masked == masked.max())[0])
        total += 0.5 * math.log1p(max(var[j], 0.0) / sigma_sq)
        c = gram(kernel, G, G[j:j + 1])[:, 0]
        for v in rows:
            c = c - v * v[j]
        v_new = c / math.sqrt(var[j] + sigma_sq)
        rows.append(v_new)
        var = var - v_new**2
        free[j] = False
        picked.append(j)
    return (total, picked) if return_indices else total


def estimate_rho_hat(pairs) -> float:
    """Pearson correlation of ``(f, f_ml)`` pairs."""
    P = np.asarray(pairs, dtype=float)
    if P.ndim != 2 or P.shape[1] != 2:
        raise InputError("pairs must be a list of (f, f_ml) values")
    if len(P) < 3:
        raise InputError("need at least 3 pairs")
    if not np.all(np.isfinite(P)):
        raise InputError("pairs must be finite")
    if np.ptp(P[:, 0]) == 0 or np.ptp(P[:, 1]) == 0:
        raise InputError("both coordinates need nonzero variance")
    return float(np.corrcoef(P[:, 0], P[:, 1])[0, 1])
