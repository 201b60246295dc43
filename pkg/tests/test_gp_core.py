import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pa_gp_ucb.errors import InputError, NumericalError
from pa_gp_ucb.gp_core import (JITTER_CAP, JITTER_FLOOR, Domain, KernelSpec, chol_solve, cholesky, gp_posterior,
                               gram, reference_posterior)

unit = st.floats(0.0, 1.0, allow_nan=False)


def scalar_kernel(kernel):
    return lambda a, b: float(gram(kernel, np.atleast_2d(a), np.atleast_2d(b))[0, 0])


class TestKernelSpec:
    def test_defaults(self):
        k = KernelSpec()
        assert (k.length_scale, k.signal_var, k.kind) == (0.1, 1.0, "rbf")

    @pytest.mark.parametrize("kw", [{"length_scale": 0.0}, {"signal_var": 0.0}, {"signal_var": 1.5}, {"kind": "matern"}])
    def test_rejects_bad_parameters(self, kw):
        with pytest.raises(InputError):
            KernelSpec(**kw)

    @given(x=st.lists(unit, min_size=1, max_size=4), s2=st.floats(0.01, 1.0))
    def test_diagonal_equals_signal_var(self, x, s2):
        K = gram(KernelSpec(0.3, s2), np.array(x))
        assert np.allclose(np.diag(K), s2, rtol=0, atol=1e-15)


class TestGram:
    def test_single_point(self):
        assert gram(KernelSpec(1.0, 1.0), [[0.3]]).tolist() == [[1.0]]

    def test_unit_distance(self):
        # exp(-|0 - 1|^2 / 2)
        assert gram(KernelSpec(1.0, 1.0), [0.0], [1.0])[0, 0] == pytest.approx(math.exp(-0.5), rel=1e-15)
        assert gram(KernelSpec(1.0, 1.0), [0.0], [1.0])[0, 0] == pytest.approx(0.6065306597, rel=1e-9)

    def test_three_points_symmetric(self):
        K = gram(KernelSpec(0.2), [0.1, 0.5, 0.9])
        assert np.array_equal(K, K.T)

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            gram(KernelSpec(), np.zeros((2, 2)), np.zeros((2, 3)))

    def test_entries_against_loop(self, rng):
        k = KernelSpec(0.37, 0.8)
        X, Y = rng.random((5, 2)), rng.random((4, 2))
        K = gram(k, X, Y)
        for a in range(5):
            for b in range(4):
                d2 = sum((X[a, i] - Y[b, i]) ** 2 for i in range(2))
                assert K[a, b] == pytest.approx(0.8 * math.exp(-d2 / (2 * 0.37**2)), rel=1e-12)

    @given(X=arrays(float, (4, 2), elements=unit), shift=arrays(float, (2,), elements=st.floats(-5, 5)))
    def test_stationary_and_symmetric(self, X, shift):
        k = KernelSpec(0.25)
        K = gram(k, X)
        assert np.array_equal(K, K.T)
        assert np.allclose(gram(k, X + shift), K, atol=1e-12)

    @given(X=arrays(float, (6, 1), elements=unit))
    def test_psd(self, X):
        assert np.linalg.eigvalsh(gram(KernelSpec(0.2), X)).min() > -1e-10


class TestDomain:
    def test_grid_includes_endpoints(self):
        g = Domain(1, 2.0).grid(5)
        assert g[:, 0].tolist() == [0.0, 0.5, 1.0, 1.5, 2.0]

    def test_grid_2d_shape(self):
        assert Domain(2).grid(4).shape == (16, 2)

    def test_check(self):
        with pytest.raises(InputError):
            Domain(1).check([1.5])
        assert Domain(1).contains([0.0, 1.0])

    def test_rejects_bad(self):
        with pytest.raises(InputError):
            Domain(0)
        with pytest.raises(InputError):
            Domain(1, -1.0)


class TestCholSolve:
    def test_identity(self):
        assert chol_solve(np.eye(2), [1.0, 0.0]).tolist() == [1.0, 0.0]

    def test_diagonal(self):
        assert chol_solve(np.diag([2.0, 4.0]), [2.0, 4.0]) == pytest.approx([1.0, 1.0], abs=1e-15)

    def test_random_spd_residual(self, rng):
        G = rng.standard_normal((5, 5))
        A = G @ G.T + 0.5 * np.eye(5)
        b = rng.standard_normal(5)
        x = chol_solve(A, b)
        assert np.max(np.abs(A @ x - b)) < 1e-10

    def test_jitter_escalates_on_singular(self):
        A = np.ones((3, 3))
        L, used = cholesky(A)
        assert JITTER_FLOOR <= used <= JITTER_CAP
        assert np.allclose(L @ L.T, A + used * np.eye(3))

    def test_failure_reports_final_jitter(self):
        with pytest.raises(NumericalError) as exc:
            cholesky(-np.eye(2))
        assert exc.value.jitter == pytest.approx(JITTER_CAP)

    def test_not_square(self):
        with pytest.raises(InputError):
            chol_solve(np.ones((2, 3)), [1.0, 1.0])


class TestReferencePosterior:
    def test_prior(self):
        k = scalar_kernel(KernelSpec(0.5))
        mean, cov = reference_posterior(k, np.zeros((0, 0)), [], [(0.0,), (0.3,)])
        assert mean.tolist() == [0.0, 0.0]
        assert cov == pytest.approx(gram(KernelSpec(0.5), [0.0, 0.3]))

    def test_single_observation(self):
        # 1 / 1.1 and 1 - 1 / 1.1
        k = scalar_kernel(KernelSpec(1.0, 1.0))
        mean, cov = reference_posterior(k, [[0.1]], [((0.2,), 1.0)], [(0.2,)])
        assert mean[0] == pytest.approx(0.9090909090909091, rel=1e-12)
        assert cov[0, 0] == pytest.approx(0.09090909090909094, rel=1e-12)

    def test_bad_noise_shape(self):
        with pytest.raises(InputError):
            reference_posterior(scalar_kernel(KernelSpec()), np.eye(2), [((0.0,), 1.0)], [(0.0,)])

    def test_agrees_with_gp_posterior(self, rng):
        k = KernelSpec(0.2)
        X, y, Q = rng.random(6), rng.standard_normal(6), np.linspace(0, 1, 9)
        mu, var = gp_posterior(k, X, y, 0.05, Q)
        mean, cov = reference_posterior(scalar_kernel(k), 0.05 * np.eye(6), list(zip(((x,) for x in X), y)),
                                        [(q,) for q in Q])
        assert np.max(np.abs(mu - mean)) < 1e-10
        assert np.max(np.abs(var - np.diag(cov))) < 1e-10

    @given(X=arrays(float, (5,), elements=unit), y=arrays(float, (5,), elements=st.floats(-3, 3)),
           Q=arrays(float, (4,), elements=unit))
    def test_covariance_is_symmetric_and_bounded(self, X, y, Q):
        s2 = 0.7
        mean, cov = reference_posterior(scalar_kernel(KernelSpec(0.3, s2)), 0.01 * np.eye(5),
                                        list(zip(((x,) for x in X), y)), [(q,) for q in Q])
        assert np.max(np.abs(cov - cov.T)) < 1e-10
        assert np.all(np.diag(cov) >= -1e-10) and np.all(np.diag(cov) <= s2 + 1e-10)

    @given(X=arrays(float, (4,), elements=unit), x_new=unit, Q=arrays(float, (5,), elements=unit))
    def test_more_data_never_inflates_variance(self, X, x_new, Q):
        k = KernelSpec(0.2)
        _, v0 = gp_posterior(k, X, np.zeros(4), 0.01, Q)
        _, v1 = gp_posterior(k, np.append(X, x_new), np.zeros(5), 0.01, Q)
        assert np.all(v1 <= v0 + 1e-8)


def test_gp_posterior_empty_is_prior():
    mu, var = gp_posterior(KernelSpec(0.2, 0.5), [], [], 0.1, [0.1, 0.2])
    assert mu.tolist() == [0.0, 0.0] and var.tolist() == [0.5, 0.5]
