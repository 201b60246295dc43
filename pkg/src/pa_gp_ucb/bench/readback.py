"""Nearest-arm readback around a recommended point."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..errors import InputError
from ..oracles.arms import ArmTable


class Neighbor(NamedTuple):
    arm_id: str
    text: str
    distance: float


def nearest_arms(table: ArmTable, x_best, k: int) -> list[Neighbor]:
    """The ``k`` arms closest to ``x_best`` in the rescaled embedding space (ties by arm id)."""
    if not 1 <= k <= len(table):
        raise InputError(f"k must lie in [1, {len(table)}]")
    x = np.asarray(x_best, dtype=float).reshape(-1)
    if x.shape[0] != table.dim:
        raise InputError(f"x_best must be {table.dim}-D")
    dist = np.sqrt(((table.embeddings - x) ** 2).sum(axis=1))
    order = sorted(range(len(table)), key=lambda i: (dist[i], table.arm_ids[i]))
    return [Neighbor(table.arm_ids[i], table.texts[i], float(dist[i])) for i in order[:k]]
