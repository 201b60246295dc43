"""Synthetic GP function pairs with controllable correlation and local sign flips."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError
from ..gp_core import JITTER_FLOOR, KernelSpec, as_points, cholesky, gram


@dataclass(frozen=True)
class GroundPair:
    """True and predicted reward tabulated on a fixed evaluation grid."""

    grid: np.ndarray = field(repr=False)
    f_table: np.ndarray = field(repr=False)
    f_ml_table: np.ndarray = field(repr=False)

    @property
    def star_index(self) -> int:
        return int(np.flatnonzero(self.f_table == self.f_table.max())[0])

    @property
    def x_star(self):
        return self.grid[self.star_index]

    @property
    def f_star(self) -> float:
        return float(self.f_table[self.star_index])

    def replace_ml(self, f_ml_table):
        return GroundPair(self.grid, self.f_table, np.asarray(f_ml_table, dtype=float))


def sample_synthetic_pair(kernel: KernelSpec, rho: float, grid, seed) -> GroundPair:
    """Draw ``f`` and an independent ``g`` from the GP prior; ``f_ml = rho f + sqrt(1 - rho^2) g``."""
    if abs(rho) > 1:
        raise InputError("|rho| must be <= 1")
    grid = as_points(grid)
    if len(grid) == 0:
        raise InputError("grid must be nonempty")
    L, _ = cholesky(gram(kernel, grid), jitter=JITTER_FLOOR * kernel.signal_var, scale=kernel.signal_var)
    z = np.random.default_rng(seed).standard_normal((2, len(grid)))
    f = L @ z[0]
    g = L @ z[1]
    f_ml = rho * f + np.sqrt(1.0 - rho**2) * g
    return GroundPair(grid, f, f_ml)


def _interval_array(interval, dim):
    iv = np.asarray(interval, dtype=float)
    if iv.shape == (2,):
        iv = np.tile(iv, (dim, 1))
    if iv.shape != (dim, 2):
        raise InputError(f"interval must be (lo, hi) or {dim} such pairs")
    return iv


def flip_mask(grid, interval):
    """Grid points inside the closed box ``interval``; ``lo > hi`` on any axis means empty."""
    grid = as_points(grid)
    iv = _interval_array(interval, grid.shape[1])
    return np.all((grid >= iv[:, 0]) & (grid <= iv[:, 1]), axis=1)


def apply_sign_flip(pair: GroundPair, interval=(0.4, 0.6)) -> GroundPair:
    """Negate the prediction inside ``interval``; the true reward is untouched."""
    mask = flip_mask(pair.grid, interval)
    f_ml = pair.f_ml_table.copy()
    f_ml[mask] = -f_ml[mask]
    return pair.replace_ml(f_ml)
