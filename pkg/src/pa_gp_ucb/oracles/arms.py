"""Arm tables: CSV loading, rescaling and planted predictors."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from ..errors import InputError, ParseError

BUNDLED = "bundled"


@dataclass(frozen=True)
class ArmTable:
    arm_ids: tuple
    texts: tuple
    embeddings: np.ndarray = field(repr=False)
    mean_rewards: np.ndarray = field(repr=False)
    raw_embeddings: np.ndarray = field(repr=False, default=None)

    def __len__(self):
        return len(self.arm_ids)

    @property
    def dim(self):
        return self.embeddings.shape[1]

    def index(self, arm_id):
        try:
            return self.arm_ids.index(arm_id)
        except ValueError:
            raise InputError(f"unknown arm id {arm_id!r}") from None


def bundled_fixture_path() -> Path:
    return Path(str(resources.files("pa_gp_ucb") / "data" / "arms54.csv"))


def rescale_unit(E):
    """Per-column affine map onto ``[0, 1]``; constant columns map to 0.5."""
    lo, hi = E.min(axis=0), E.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    out = (E - lo) / span
    out[:, hi <= lo] = 0.5
    return out


def load_arm_table(path) -> ArmTable:
    """Read ``arm_id,text,e1,...,ed,mean_reward`` (header required)."""
    path = bundled_fixture_path() if str(path) == BUNDLED else Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", row=1) from None
        header = [h.strip() for h in header]
        d = len(header) - 3
        expected = ["arm_id", "text"] + [f"e{i}" for i in range(1, d + 1)] + ["mean_reward"]
        if d < 1 or header != expected:
            raise ParseError(f"bad header {header!r}; expected arm_id,text,e1..ed,mean_reward", row=1)
        ids, texts, emb, rew = [], [], [], []
        seen = set()
        for rowno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", row=rowno)
            arm_id = row[0].strip()
            if arm_id in seen:
                raise ParseError(f"duplicate arm_id {arm_id!r}", row=rowno)
            seen.add(arm_id)
            try:
                e = [float(v) for v in row[2:-1]]
            except ValueError:
                raise ParseError("non-numeric embedding coordinate", row=rowno) from None
            try:
                r = float(row[-1])
            except ValueError:
                raise ParseError(f"non-numeric mean_reward {row[-1]!r}", row=rowno) from None
            if not (math.isfinite(r) and all(math.isfinite(v) for v in e)):
                raise ParseError("non-finite value", row=rowno)
            ids.append(arm_id)
            texts.append(row[1])
            emb.append(e)
            rew.append(r)
    if not ids:
        raise ParseError("no data rows", row=2)
    raw = np.array(emb, dtype=float)
    return ArmTable(tuple(ids), tuple(texts), rescale_unit(raw), np.array(rew), raw)


def load_predictions(path, table: ArmTable):
    """Read ``arm_id,pred`` rows (any second column name) aligned to ``table``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) != 2 or header[0].strip() != "arm_id":
            raise ParseError("prediction file needs header arm_id,<value column>", row=1)
        preds = {}
        for rowno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                preds[row[0].strip()] = float(row[1])
            except (ValueError, IndexError):
                raise ParseError("bad prediction row", row=rowno) from None
    missing = [a for a in table.arm_ids if a not in preds]
    if missing:
        raise ParseError(f"no prediction for arms {missing[:5]}")
    return np.array([preds[a] for a in table.arm_ids])


def standardize(v):
    v = np.asarray(v, dtype=float)
    sd = v.std()
    return (v - v.mean()) / (sd if sd > 0 else 1.0)


def planted_predictor(values, rho, seed=0):
    """A predictor whose empirical Pearson correlation with ``values`` is exactly ``rho``.

    Returned on the standardised scale.
    """
    if not -1 <= rho <= 1:
        raise InputError("rho must lie in [-1, 1]")
    z = standardize(values)
    w = np.random.default_rng(seed).standard_normal(len(z))
    w = w - w.mean()
    w = w - (w @ z) / (z @ z) * z
    w = standardize(w)
    return rho * z + math.sqrt(1 - rho**2) * w
