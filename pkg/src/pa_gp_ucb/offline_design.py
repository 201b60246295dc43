"""Offline design: epsilon-nets, replication requirements and the empirical ratio R-hat."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import InputError
from .gp_core import Domain, as_points
from .joint_model import JointModel, NoiseSpec


@dataclass(frozen=True)
class NetDesign:
    epsilon: float
    centers: np.ndarray = field(repr=False)
    replication: int = 1

    @property
    def M(self):
        return len(self.centers)

    def with_replication(self, n):
        return NetDesign(self.epsilon, self.centers, int(n))


def epsilon_net(domain: Domain, epsilon: float, replication: int = 1) -> NetDesign:
    """Centers of the cells of width ``2 epsilon`` tiling ``[0, r]^d`` (sup-norm net).

    ``epsilon > r/2`` degenerates to the single box midpoint.
    """
    if not epsilon > 0:
        raise InputError("epsilon must be positive")
    r, d = domain.side, domain.dim
    per_dim = max(1, math.ceil(r / (2 * epsilon) - 1e-12))
    if epsilon > r / 2:
        axis = np.array([r / 2])
    else:
        # last cell is clipped to the box so the net stays inside it
        axis = np.minimum((2 * np.arange(per_dim) + 1) * epsilon, r - epsilon)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    centers = np.stack([m.ravel() for m in mesh], axis=1)
    return NetDesign(float(epsilon), centers, int(replication))


def net_from_count(domain: Domain, per_dim: int, replication: int = 1) -> NetDesign:
    """Net with ``per_dim`` centers per axis, i.e. ``epsilon = r / (2 per_dim)``."""
    if per_dim < 1:
        raise InputError("per_dim must be at least 1")
    return epsilon_net(domain, domain.side / (2 * per_dim), replication)


def sigma_min_ml_sq(T, eta_sq, eta_ml_sq, rho, k_min=1.0) -> float:
    """Lower bound on the online-only prediction variance after ``T`` paired rounds."""
    if T < 1:
        raise InputError("T must be at least 1")
    if not 0 < k_min <= 1:
        raise InputError("k_min must lie in (0, 1]")
    if abs(rho) >= 1:
        raise InputError("|rho| must be < 1")
    c = 1 - rho**2
    num = 1 / c + T / eta_sq
    den = T**2 / (eta_ml_sq * eta_sq) + (1 / eta_ml_sq + 1 / eta_sq) * T / (k_min * c) + c / k_min**2
    return num / den


class SufficientDesign(NamedTuple):
    epsilon_max: float
    N_min: int
    sigma_min_sq: float
    lipschitz: float


def sufficient_design(R, T, noise: NoiseSpec, rho, k_min=1.0, delta=0.1, a=1.0, b=1.0, d=1) -> SufficientDesign:
    """Largest net radius and smallest replication guaranteeing the ratio bound ``R``."""
    if not 0 < R <= 1:
        raise InputError("R must lie in (0, 1]")
    inner = d * a / delta
    if inner <= 1:
        raise InputError("log(da/delta) must be positive")
    s2 = sigma_min_ml_sq(T, noise.eta_sq, noise.eta_ml_sq, rho, k_min)
    L = b * math.sqrt(math.log(inner))
    eps = math.sqrt(s2 * R / (2 * L**2 * d**2))
    n_req = 2 * noise.eta_ml_sq / (s2 * R)
    # guard against ceil() of values like 4.000000000000001
    N = max(1, math.ceil(n_req * (1 - 1e-12)))
    return SufficientDesign(eps, N, s2, L)


class RHatEstimate(NamedTuple):
    r_hat: float
    n_skipped: int


def variance_ratio(model: JointModel, X):
    """Per-point ``(sigma_ml_all / sigma_ml)^2`` clipped to ``[0, 1]``; NaN where ``sigma_ml`` degenerates."""
    s = model.online_posterior(X)
    _, sd_all = model.augmented_posterior(X)
    ok = s.sigma_ml >= model.rho_tol
    ratio = np.where(ok, sd_all / np.where(ok, s.sigma_ml, 1.0), np.nan) ** 2
    return np.where(ok, np.clip(ratio, 0.0, 1.0), np.nan)


def estimate_r_hat(model: JointModel, holdout) -> RHatEstimate:
    """Worst squared std ratio over a holdout set."""
    holdout = as_points(holdout, model.dim)
    if len(holdout) == 0:
        raise InputError("holdout must be nonempty")
    if not model.offline_entries:
        warnings.warn("estimating R-hat without offline data")
    ratio = variance_ratio(model, holdout)
    skipped = int(np.isnan(ratio).sum())
    if skipped:
        warnings.warn(f"{skipped} holdout points skipped (degenerate sigma_ml)")
    if skipped == len(ratio):
        return RHatEstimate(1.0, skipped)
    return RHatEstimate(float(np.nanmax(ratio)), skipped)


def snap_to_grid(points, grid):
    """Index of the nearest grid point (Euclidean) for each point; lowest index on ties."""
    points, grid = as_points(points), as_points(grid)
    d2 = ((points[:, None, :] - grid[None, :, :]) ** 2).sum(-1)
    return d2.argmin(axis=1)
