"""Scalar kernels, jittered Cholesky solves and a brute-force GP posterior.

The brute-force :func:`reference_posterior` deliberately avoids every shortcut
used elsewhere (no Cholesky, no vectorised blocks) so that it can serve as an
independent oracle for the structured posteriors in :mod:`pa_gp_ucb.joint_model`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Hashable, Sequence

import numpy as np
import scipy.linalg
from scipy.spatial.distance import cdist

from .errors import InputError, NumericalError

JITTER_FLOOR = 1e-9
JITTER_FACTOR = 10.0
JITTER_CAP = 1e-3


@dataclass(frozen=True)
class KernelSpec:
    """Stationary RBF kernel ``s2 * exp(-|x - x'|^2 / (2 l^2))``."""

    length_scale: float = 0.1
    signal_var: float = 1.0
    kind: str = "rbf"

    def __post_init__(self):
        if self.kind != "rbf":
            raise InputError(f"unsupported kernel kind {self.kind!r}")
        if not self.length_scale > 0:
            raise InputError("length_scale must be positive")
        if not 0 < self.signal_var <= 1:
            raise InputError("signal_var must lie in (0, 1]")

    def __call__(self, X, Y=None):
        return gram(self, X, Y)


@dataclass(frozen=True)
class Domain:
    """The box ``[0, side]^dim``."""

    dim: int = 1
    side: float = 1.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise InputError("dim must be a positive integer")
        if not self.side > 0:
            raise InputError("side must be positive")

    def contains(self, X, atol=1e-12):
        X = as_points(X, self.dim)
        return bool(np.all((X >= -atol) & (X <= self.side + atol)))

    def check(self, X):
        X = as_points(X, self.dim)
        if not self.contains(X):
            raise InputError(f"points outside the box [0, {self.side}]^{self.dim}")
        return X

    def grid(self, per_dim):
        """Regular grid with ``per_dim`` points per axis, endpoints included."""
        axis = np.linspace(0.0, self.side, int(per_dim))
        mesh = np.meshgrid(*([axis] * self.dim), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass(frozen=True)
class PosteriorSummary1D:
    mean: float
    std: float


def as_points(X, dim=None):
    """Coerce ``X`` to a float array of shape ``(n, d)``.

    A 1-D input is read as a list of scalars when ``dim`` is 1 or unknown and
    as a single point when ``dim`` equals its length.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        if dim is not None and dim > 1:
            if X.shape[0] != dim:
                raise InputError(f"expected points of dimension {dim}, got {X.shape[0]}")
            X = X.reshape(1, dim)
        else:
            X = X.reshape(-1, 1)
    elif X.ndim != 2:
        raise InputError("points must be given as an (n, d) array")
    if dim is not None and X.shape[1] != dim:
        raise InputError(f"expected points of dimension {dim}, got {X.shape[1]}")
    return X


def gram(kernel: KernelSpec, X, Y=None) -> np.ndarray:
    """Kernel matrix with entry ``(a, b) = k(X[a], Y[b])``; ``Y=None`` means ``Y = X``."""
    X = as_points(X)
    Y = X if Y is None else as_points(Y)
    if X.shape[1] != Y.shape[1]:
        raise InputError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    sq = cdist(X, Y, "sqeuclidean")
    return kernel.signal_var * np.exp(-0.5 * sq / kernel.length_scale**2)


def cholesky(A, jitter=0.0, scale=1.0, floor=JITTER_FLOOR, cap=JITTER_CAP):
    """Lower Cholesky factor of ``A + jitter * I`` with geometric jitter escalation.

    ``floor`` and ``cap`` are relative to ``scale`` (normally the kernel signal
    variance). Returns ``(L, jitter_used)``.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, 0)), jitter
    eye = np.eye(n)
    current = float(jitter)
    cap = cap * scale
    while True:
        try:
            return np.linalg.cholesky(A + current * eye), current
        except np.linalg.LinAlgError:
            if current >= cap:
                raise NumericalError("Cholesky factorization failed", jitter=current)
            current = min(max(current * JITTER_FACTOR, floor * scale), cap)


def chol_solve(A, rhs, jitter=0.0, scale=1.0):
    """Solve ``(A + jitter * I) x = rhs`` through a (jitter-escalated) Cholesky factor."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError("A must be square")
    L, _ = cholesky(A, jitter=jitter, scale=scale)
    return scipy.linalg.cho_solve((L, True), np.asarray(rhs, dtype=float))


def gp_posterior(kernel: KernelSpec, X, y, noise_var, Xq):
    """Standard single-output GP regression.

    ``noise_var`` is a scalar or a per-observation vector. Returns the posterior
    mean and marginal variance (clipped at zero) at ``Xq``.
    """
    Xq = as_points(Xq)
    X = as_points(X, Xq.shape[1]) if np.size(X) else np.zeros((0, Xq.shape[1]))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] == 0:
        return np.zeros(len(Xq)), np.full(len(Xq), kernel.signal_var)
    noise = np.broadcast_to(np.asarray(noise_var, dtype=float), y.shape)
    A = gram(kernel, X) + np.diag(noise)
    L, _ = cholesky(A, scale=kernel.signal_var)
    Kq = gram(kernel, Xq, X)
    alpha = scipy.linalg.cho_solve((L, True), y)
    V = scipy.linalg.solve_triangular(L, Kq.T, lower=True)
    var = kernel.signal_var - np.einsum("ij,ij->j", V, V)
    return Kq @ alpha, np.maximum(var, 0.0)


def reference_posterior(
    kernel_fn: Callable[[Hashable, Hashable], float],
    noise_cov,
    obs: Sequence[tuple],
    queries: Sequence[Hashable],
):
    """Exact GP conditioning over an arbitrary index set, by direct dense solve.

    ``kernel_fn(i, j)`` gives the prior covariance of two indices, ``obs`` is a
    list of ``(index, value)`` pairs and ``noise_cov`` the full noise covariance
    of those observations. Returns ``(mean, cov)`` over ``queries``.
    """
    n, q = len(obs), len(queries)
    Kqq = np.array([[kernel_fn(a, b) for b in queries] for a in queries], dtype=float).reshape(q, q)
    if n == 0:
        return np.zeros(q), Kqq
    noise_cov = np.atleast_2d(np.asarray(noise_cov, dtype=float))
    if noise_cov.shape != (n, n):
        raise InputError(f"noise_cov must be {n}x{n}, got {noise_cov.shape}")
    idx = [o[0] for o in obs]
    y = np.array([o[1] for o in obs], dtype=float)
    Kxx = np.array([[kernel_fn(a, b) for b in idx] for a in idx], dtype=float)
    Kqx = np.array([[kernel_fn(a, b) for b in idx] for a in queries], dtype=float).reshape(q, n)
    S = Kxx + noise_cov
    jitter = 0.0
    while True:
        try:
            sol = np.linalg.solve(S + jitter * np.eye(n), np.column_stack([y, Kqx.T]))
            break
        except np.linalg.LinAlgError:
            if jitter >= JITTER_CAP:
                raise NumericalError("reference system is singular", jitter=jitter)
            jitter = max(jitter * JITTER_FACTOR, JITTER_FLOOR)
    mean = Kqx @ sol[:, 0]
    cov = Kqq - Kqx @ sol[:, 1:]
    return mean, 0.5 * (cov + cov.T)
