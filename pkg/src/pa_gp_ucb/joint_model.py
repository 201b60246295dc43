"""Two-output GP over ``(f, f_ml)`` with coregionalised prior ``k(x, x') * B``.

The model keeps the paired online history and the replicated offline
prediction history, and answers three kinds of posterior query:

* online-only: conditions on paired online rounds, gives both task marginals
  and their posterior correlation;
* offline-only: the prediction task conditioned on the offline design alone;
* augmented: the prediction task conditioned on offline plus online data.

Observations are stacked as ``(point, task, value, noise)`` rows and every
posterior is a Cholesky solve over the rows it needs. New online rounds are
appended to the existing factors (and to cached solves against recently used
query sets) instead of refactorising; offline additions trigger a rebuild.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import InputError
from .gp_core import KernelSpec, as_points, cholesky, gp_posterior, gram

TRUE, ML = 0, 1


@dataclass(frozen=True)
class TaskCoupling:
    rho: float = 0.8

    def __post_init__(self):
        if not -1.0 <= self.rho <= 1.0:
            raise InputError("rho must lie in [-1, 1]")

    @property
    def B(self):
        return np.array([[1.0, self.rho], [self.rho, 1.0]])


@dataclass(frozen=True)
class NoiseSpec:
    eta_sq: float = 0.01
    eta_ml_sq: float = 0.01

    def __post_init__(self):
        if not (self.eta_sq > 0 and self.eta_ml_sq > 0):
            raise InputError("noise variances must be strictly positive")


@dataclass
class BivariateSummary:
    """Per-point posterior quantities; fields are floats or equal-length arrays."""

    mu_true: np.ndarray
    mu_ml: np.ndarray
    sigma_true: np.ndarray
    sigma_ml: np.ndarray
    rho_t: np.ndarray
    mu_ml_all: np.ndarray | None = None
    sigma_ml_all: np.ndarray | None = None

    def __getitem__(self, i):
        pick = lambda v: None if v is None else np.asarray(v)[i]
        return BivariateSummary(*(pick(getattr(self, f)) for f in _SUMMARY_FIELDS))


_SUMMARY_FIELDS = ("mu_true", "mu_ml", "sigma_true", "sigma_ml", "rho_t", "mu_ml_all", "sigma_ml_all")


def joint_index_kernel(kernel: KernelSpec, rho: float):
    """Prior covariance over ``(point, task)`` indices, for use with ``reference_posterior``."""
    B = TaskCoupling(rho).B

    def k(a, b):
        (xa, ta), (xb, tb) = a, b
        return float(B[ta, tb] * gram(kernel, np.atleast_2d(xa), np.atleast_2d(xb))[0, 0])

    return k


class JointModel:
    """Online and offline histories plus the posterior queries built on them.

    ``mean`` is a constant prior mean shared by both tasks. With
    ``incremental=False`` every query refactorises its system from scratch.
    """

    def __init__(self, kernel: KernelSpec, coupling: TaskCoupling, noise: NoiseSpec, dim=1, mean=0.0,
                 incremental=True):
        self.kernel = kernel
        self.coupling = coupling
        self.noise = noise
        self.dim = dim
        self.mean = float(mean)
        self.rho_tol = 1e-12 * kernel.signal_var
        self._online: list[tuple[np.ndarray, float, float]] = []
        self._offline: dict[tuple, list] = {}
        self.incremental = bool(incremental)
        self._factors: dict = {}

    # -- histories ---------------------------------------------------------
    @property
    def online_rounds(self):
        return list(self._online)

    @property
    def offline_entries(self):
        """``(center, mean_obs, count)`` triples in insertion order."""
        return [(np.array(c), s / n, n) for c, (s, n) in self._offline.items()]

    def _point(self, x):
        x = as_points(x, self.dim)
        if x.shape[0] != 1:
            raise InputError("expected a single point")
        return x[0]

    def observe_online(self, x, y, y_ml):
        x = self._point(x)
        if not (np.isfinite(y) and np.isfinite(y_ml)):
            raise InputError("online observations must be finite")
        self._online.append((x, float(y), float(y_ml)))
        if not self.incremental:
            self._factors.clear()
            return
        for (_, use_true, use_ml), f in self._factors.items():
            tasks = [t for t, use in ((TRUE, use_true), (ML, use_ml)) if use]
            if tasks:
                vals = {TRUE: float(y), ML: float(y_ml)}
                nv = {TRUE: self.noise.eta_sq, ML: self.noise.eta_ml_sq}
                f.append(np.tile(x, (len(tasks), 1)), np.array(tasks),
                         np.array([vals[t] for t in tasks]) - self.mean, np.array([nv[t] for t in tasks]))

    def observe_offline(self, center, obs):
        """Add replicated prediction observations at ``center``; merges with earlier calls."""
        c = tuple(self._point(center))
        obs = np.atleast_1d(np.asarray(obs, dtype=float))
        if obs.size == 0:
            return
        if not np.all(np.isfinite(obs)):
            raise InputError("offline observations must be finite")
        entry = self._offline.setdefault(c, [0.0, 0])
        entry[0] += float(obs.sum())
        entry[1] += int(obs.size)
        self._drop_offline_factors()

    def observe_offline_mean(self, center, mean_obs, count):
        """Add an already aggregated offline entry (``count`` replicates averaging ``mean_obs``)."""
        if int(count) < 1:
            raise InputError("count must be at least 1")
        c = tuple(self._point(center))
        entry = self._offline.setdefault(c, [0.0, 0])
        entry[0] += float(mean_obs) * int(count)
        entry[1] += int(count)
        self._drop_offline_factors()

    def _drop_offline_factors(self):
        for key in [k for k in self._factors if k[0]]:
            del self._factors[key]

    # -- stacked systems ---------------------------------------------------
    def _rows(self, offline: bool, online_true: bool, online_ml: bool):
        """Stacked rows: offline entries first, then each online round in order."""
        pts, tasks, vals, noise = [], [], [], []
        if offline:
            for c, (s, n) in self._offline.items():
                pts.append(c)
                tasks.append(ML)
                vals.append(s / n)
                noise.append(self.noise.eta_ml_sq / n)
        for x, y, y_ml in self._online:
            for use, task, v, nv in ((online_true, TRUE, y, self.noise.eta_sq), (online_ml, ML, y_ml, self.noise.eta_ml_sq)):
                if use:
                    pts.append(x)
                    tasks.append(task)
                    vals.append(v)
                    noise.append(nv)
        X = np.array(pts, dtype=float).reshape(len(pts), self.dim)
        return X, np.array(tasks, dtype=int), np.array(vals, dtype=float) - self.mean, np.array(noise, dtype=float)

    def _factor(self, key) -> "_Factor":
        f = self._factors.get(key)
        if f is None:
            f = self._factors[key] = _Factor(self, *self._rows(*key))
        return f

    def _conditioned(self, Xq, key, query_tasks):
        """Means, variances and (for two tasks) the cross-covariance at ``Xq``."""
        Xq = as_points(Xq, self.dim)
        f = self._factor(key)
        s2 = self.kernel.signal_var
        q = len(Xq)
        if f.n == 0:
            means = [np.full(q, self.mean) for _ in query_tasks]
            var = [np.full(q, s2) for _ in query_tasks]
            cov = np.full(q, self.coupling.rho * s2)
            return means, var, cov
        Vs = [f.solved(Xq, task) for task in query_tasks]
        means = [self.mean + V.T @ f.w for V in Vs]
        var = [s2 - np.einsum("ij,ij->j", V, V) for V in Vs]
        cov = None
        if len(Vs) == 2:
            cov = self.coupling.rho * s2 - np.einsum("ij,ij->j", Vs[0], Vs[1])
        return means, var, cov

    # -- posteriors --------------------------------------------------------
    def online_posterior(self, X) -> BivariateSummary:
        """Posterior of both tasks given the paired online rounds only."""
        (mu_t, mu_m), (v_t, v_m), cov = self._conditioned(X, (False, True, True), (TRUE, ML))
        sd_t, sd_m = np.sqrt(np.maximum(v_t, 0.0)), np.sqrt(np.maximum(v_m, 0.0))
        denom = sd_t * sd_m
        ok = denom >= self.rho_tol
        rho_t = np.where(ok, cov / np.where(ok, denom, 1.0), 0.0)
        return BivariateSummary(mu_t, mu_m, sd_t, sd_m, np.clip(rho_t, -1.0, 1.0))

    def offline_posterior(self, X):
        """``(mean, std)`` of the prediction task given the offline design alone."""
        Xq = as_points(X, self.dim)
        entries = self.offline_entries
        if not entries:
            return np.full(len(Xq), self.mean), np.full(len(Xq), np.sqrt(self.kernel.signal_var))
        C = np.array([c for c, _, _ in entries])
        y = np.array([m for _, m, _ in entries]) - self.mean
        noise = np.array([self.noise.eta_ml_sq / n for _, _, n in entries])
        mu, var = gp_posterior(self.kernel, C, y, noise, Xq)
        return self.mean + mu, np.sqrt(var)

    def augmented_posterior(self, X):
        """``(mean, std)`` of the prediction task given offline and online data."""
        (mu,), (var,), _ = self._conditioned(X, (True, True, True), (ML,))
        return mu, np.sqrt(np.maximum(var, 0.0))

    def true_marginal(self, X, offline=True, online_ml=True):
        """``(mean, std)`` of the true task under a chosen conditioning set.

        Used by the uncorrected baselines: ``online_ml=False`` drops the online
        prediction observations, ``offline=False`` drops the offline design.
        """
        (mu,), (var,), _ = self._conditioned(X, (offline, True, online_ml), (TRUE,))
        return mu, np.sqrt(np.maximum(var, 0.0))

    def summary(self, X) -> BivariateSummary:
        """Online posterior with the augmented prediction quantities filled in."""
        s = self.online_posterior(X)
        s.mu_ml_all, s.sigma_ml_all = self.augmented_posterior(X)
        return s

    def posterior_at(self, x) -> BivariateSummary:
        """:meth:`summary` at a single point, with scalar fields."""
        s = self.summary(x)
        if len(np.atleast_1d(s.mu_true)) != 1:
            raise InputError("posterior_at expects a single point")
        return BivariateSummary(*(None if getattr(s, f) is None else float(np.asarray(getattr(s, f))[0])
                                  for f in _SUMMARY_FIELDS))


class _Factor:
    """Growing lower Cholesky factor of one conditioning set.

    Keeps ``w = L^-1 y`` and, for the last few query sets, ``V = L^-1 C^T`` so a
    new round costs O(n q) rather than a full triangular solve.
    """

    MAX_QUERY_SETS = 4

    def __init__(self, model: JointModel, X, tasks, vals, noise):
        self.model = model
        self.X, self.tasks, self.vals, self.noise = X, tasks, vals, noise
        self._queries: list[tuple[np.ndarray, dict]] = []
        self._refactor()

    @property
    def n(self):
        return len(self.X)

    def _cov(self, Xa, ta, Xb, tb):
        coup = np.where(ta[:, None] == tb[None, :], 1.0, self.model.coupling.rho)
        return coup * gram(self.model.kernel, Xa, Xb)

    def _refactor(self):
        if self.n:
            A = self._cov(self.X, self.tasks, self.X, self.tasks) + np.diag(self.noise)
            self.L, self.jitter = cholesky(A, scale=self.model.kernel.signal_var)
            self.w = scipy.linalg.solve_triangular(self.L, self.vals, lower=True)
        else:
            self.L, self.jitter, self.w = np.zeros((0, 0)), 0.0, np.zeros(0)
        for _, Vs in self._queries:
            Vs.clear()

    def append(self, X, tasks, vals, noise):
        n, k = self.n, len(X)
        X_old, t_old = self.X, self.tasks
        self.X = np.vstack([X_old, X])
        self.tasks = np.concatenate([t_old, tasks])
        self.vals = np.concatenate([self.vals, vals])
        self.noise = np.concatenate([self.noise, noise])
        if n == 0:
            self._refactor()
            return
        A12 = self._cov(X_old, t_old, X, tasks)
        A22 = self._cov(X, tasks, X, tasks) + np.diag(noise + self.jitter)
        L21 = scipy.linalg.solve_triangular(self.L, A12, lower=True).T
        try:
            L22 = np.linalg.cholesky(A22 - L21 @ L21.T)
        except np.linalg.LinAlgError:
            self._refactor()
            return
        L = np.zeros((n + k, n + k))
        L[:n, :n] = self.L
        L[n:, :n] = L21
        L[n:, n:] = L22
        self.L = L
        self.w = np.concatenate([self.w, scipy.linalg.solve_triangular(L22, vals - L21 @ self.w, lower=True)])
        for Q, Vs in self._queries:
            for task, V in Vs.items():
                C = self._cov(X, tasks, Q, np.full(len(Q), task))
                Vs[task] = np.vstack([V, scipy.linalg.solve_triangular(L22, C - L21 @ V, lower=True)])

    def solved(self, Q, task):
        """``L^-1 C^T`` for the cross-covariance ``C`` between ``task`` at ``Q`` and the rows."""
        for Qc, Vs in self._queries:
            if Qc.shape == Q.shape and np.array_equal(Qc, Q):
                break
        else:
            Qc, Vs = Q.copy(), {}
            self._queries.append((Qc, Vs))
            del self._queries[:-self.MAX_QUERY_SETS]
        if task not in Vs:
            C = self._cov(self.X, self.tasks, Qc, np.full(len(Qc), task))
            Vs[task] = scipy.linalg.solve_triangular(self.L, C, lower=True)
        return Vs[task]


def stack_reference_obs(model: JointModel, offline=True, online_true=True, online_ml=True):
    """Observation list and noise covariance for ``reference_posterior`` over ``(point, task)``."""
    obs, noise = [], []
    if offline:
        for c, m, n in model.offline_entries:
            obs.append(((tuple(c), ML), m))
            noise.append(model.noise.eta_ml_sq / n)
    if online_true:
        for x, y, _ in model.online_rounds:
            obs.append(((tuple(x), TRUE), y))
            noise.append(model.noise.eta_sq)
    if online_ml:
        for x, _, y_ml in model.online_rounds:
            obs.append(((tuple(x), ML), y_ml))
            noise.append(model.noise.eta_ml_sq)
    return obs, np.diag(noise) if noise else np.zeros((0, 0))


def single_task_posterior(kernel: KernelSpec, X: Sequence, y: Sequence, noise_var: float, Xq):
    """Convenience wrapper: single-output GP ``(mean, std)``."""
    mu, var = gp_posterior(kernel, X, y, noise_var, Xq)
    return mu, np.sqrt(var)
