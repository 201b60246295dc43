import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pa_gp_ucb.errors import InputError
from pa_gp_ucb.gp_core import Domain, KernelSpec, reference_posterior
from pa_gp_ucb.joint_model import ML, JointModel, NoiseSpec, TaskCoupling, joint_index_kernel, stack_reference_obs
from pa_gp_ucb.offline_design import (epsilon_net, estimate_r_hat, net_from_count, sigma_min_ml_sq, snap_to_grid,
                                      sufficient_design, variance_ratio)

# 30-digit mpmath evaluations of the closed forms
S2_RHO08_T200 = 4.99930574390509563725284369211e-05
S2_MIXED = 3.96752310801349587502501669464e-03  # T=10, eta=0.01, eta_ml=0.04, rho=0.5, k_min=0.7
L_DEFAULT = 1.51742712938514635086297239355
EPS_UNIT = 0.329505114491130405750809006072
EPS_RHO08_HALF = 2.32979124490007391370442194987e-03

UNIT_NOISE = NoiseSpec(1.0, 1.0)
SMALL_NOISE = NoiseSpec(0.01, 0.01)


def model(rho=0.8, ls=0.2, noise=SMALL_NOISE):
    return JointModel(KernelSpec(ls), TaskCoupling(rho), noise)


class TestEpsilonNet:
    def test_two_centers(self):
        net = epsilon_net(Domain(1), 0.25)
        assert net.M == 2 and net.centers[:, 0].tolist() == [0.25, 0.75]

    def test_square(self):
        net = epsilon_net(Domain(2), 0.25)
        assert net.M == 4
        assert sorted(map(tuple, net.centers.tolist())) == [(0.25, 0.25), (0.25, 0.75), (0.75, 0.25), (0.75, 0.75)]

    def test_degenerate_radius(self):
        net = epsilon_net(Domain(1, 2.0), 1.5)
        assert net.M == 1 and net.centers.tolist() == [[1.0]]

    @pytest.mark.parametrize("eps,d", [(0.1, 1), (0.3, 1), (0.07, 2), (0.2, 3)])
    def test_size_formula(self, eps, d):
        assert epsilon_net(Domain(d), eps).M == math.ceil(1 / (2 * eps)) ** d

    def test_from_count(self):
        net = net_from_count(Domain(1), 50, replication=50)
        assert net.M == 50 and net.replication == 50 and net.epsilon == pytest.approx(0.01)

    def test_rejects_nonpositive(self):
        with pytest.raises(InputError):
            epsilon_net(Domain(1), 0.0)

    def test_coverage_2d_thousand(self, rng):
        net = epsilon_net(Domain(2), 0.1)
        x = rng.random((1000, 2))
        dist = np.abs(x[:, None, :] - net.centers[None]).max(-1).min(1)
        assert dist.max() <= 0.1

    @given(eps=st.floats(0.03, 0.6), d=st.integers(1, 2), side=st.floats(0.5, 2.0))
    def test_coverage_property(self, eps, d, side):
        net = epsilon_net(Domain(d, side), eps)
        x = np.random.default_rng(0).random((10_000, d)) * side
        dist = np.abs(x[:, None, :] - net.centers[None]).max(-1).min(1)
        assert dist.max() <= eps + 1e-12
        assert np.all((net.centers >= 0) & (net.centers <= side))


class TestSigmaMin:
    def test_unit_example(self):
        assert sigma_min_ml_sq(1, 1.0, 1.0, 0.0) == 0.5

    def test_frozen_values(self):
        assert sigma_min_ml_sq(200, 0.01, 0.01, 0.8) == pytest.approx(S2_RHO08_T200, rel=1e-12)
        assert sigma_min_ml_sq(10, 0.01, 0.04, 0.5, 0.7) == pytest.approx(S2_MIXED, rel=1e-12)

    @pytest.mark.parametrize("noise,rho", [(UNIT_NOISE, 0.0), (SMALL_NOISE, 0.8)])
    def test_strictly_decreasing(self, noise, rho):
        vals = [sigma_min_ml_sq(T, noise.eta_sq, noise.eta_ml_sq, rho) for T in range(1, 1001)]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_large_T_scale(self):
        T = 10_000
        v = sigma_min_ml_sq(T, 0.01, 0.01, 0.8)
        assert 0.5 <= v / (0.01 / T) <= 2.0

    @pytest.mark.parametrize("kw", [{"rho": 1.0}, {"rho": -1.0}, {"T": 0}, {"k_min": 0.0}, {"k_min": 1.5}])
    def test_invalid(self, kw):
        args = {"T": 5, "eta_sq": 0.01, "eta_ml_sq": 0.01, "rho": 0.5, "k_min": 1.0} | kw
        with pytest.raises(InputError):
            sigma_min_ml_sq(**args)


class TestSufficientDesign:
    def test_unit_example(self):
        sd = sufficient_design(1.0, 1, UNIT_NOISE, 0.0)
        assert sd.sigma_min_sq == 0.5
        assert sd.lipschitz == pytest.approx(L_DEFAULT, rel=1e-12)
        assert sd.epsilon_max == pytest.approx(EPS_UNIT, rel=1e-12)
        assert sd.N_min == 4
        assert (round(sd.lipschitz, 4), round(sd.epsilon_max, 4)) == (1.5174, 0.3295)

    def test_frozen_small_noise(self):
        sd = sufficient_design(0.5, 200, SMALL_NOISE, 0.8)
        assert sd.epsilon_max == pytest.approx(EPS_RHO08_HALF, rel=1e-12)
        assert sd.N_min == 801

    @given(R=st.floats(0.01, 1.0), T=st.integers(1, 500), rho=st.floats(-0.95, 0.95))
    def test_halving_R(self, R, T, rho):
        full, half = sufficient_design(R, T, SMALL_NOISE, rho), sufficient_design(R / 2, T, SMALL_NOISE, rho)
        assert half.epsilon_max**2 == pytest.approx(full.epsilon_max**2 / 2, rel=1e-12)
        n_full = 2 * SMALL_NOISE.eta_ml_sq / (full.sigma_min_sq * R)
        assert half.N_min == max(1, math.ceil(2 * n_full * (1 - 1e-12)))

    @given(R=st.floats(0.01, 1.0), T=st.integers(1, 500), rho=st.floats(-0.95, 0.95))
    def test_replication_floor(self, R, T, rho):
        sd = sufficient_design(R, T, SMALL_NOISE, rho)
        assert sd.N_min >= 2 * SMALL_NOISE.eta_ml_sq / sd.sigma_min_sq * (1 - 1e-12)

    @pytest.mark.parametrize("kw", [{"R": 0.0}, {"R": 1.2}, {"delta": 2.0}])
    def test_invalid(self, kw):
        args = {"R": 0.5, "T": 10, "noise": SMALL_NOISE, "rho": 0.5} | kw
        with pytest.raises(InputError):
            sufficient_design(**args)

    @pytest.mark.parametrize("rho", [0.0, 0.5, 0.8])
    @pytest.mark.parametrize("R", [1.0, 0.5, 0.2])
    @pytest.mark.parametrize("T", [1, 3, 10])
    def test_constructive_guarantee(self, rho, R, T):
        sd = sufficient_design(R, T, SMALL_NOISE, rho)
        net = epsilon_net(Domain(1), sd.epsilon_max, sd.N_min)
        holdout = np.linspace(0, 1, 64)
        rng = np.random.default_rng(T)
        for _ in range(3):
            m = JointModel(KernelSpec(1.0), TaskCoupling(rho), SMALL_NOISE)
            for c in net.centers:
                m.observe_offline(c, rng.normal(0.0, 0.1, net.replication))
            for x in rng.random(T):
                m.observe_online(x, *rng.standard_normal(2))
            assert estimate_r_hat(m, holdout).r_hat <= R


class TestRHat:
    def test_no_offline_is_one(self):
        m = model()
        m.observe_online(0.3, 0.1, 0.2)
        with pytest.warns(UserWarning, match="without offline"):
            est = estimate_r_hat(m, np.linspace(0, 1, 9))
        assert est.r_hat == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(variance_ratio(m, np.linspace(0, 1, 9)), 1.0, atol=1e-12)

    def test_heavy_replication_at_center(self):
        vals = []
        for n in (10, 1000, 10**6):
            m = model()
            m.observe_offline_mean(0.5, 0.0, n)
            vals.append(estimate_r_hat(m, [0.5]).r_hat)
        assert vals[0] > vals[1] > vals[2] and vals[2] < 1e-5

    def test_empty_holdout(self):
        with pytest.raises(InputError):
            estimate_r_hat(model(), np.zeros((0, 1)))

    def test_skips_degenerate_points(self):
        m = model()
        m.observe_offline_mean(0.5, 0.0, 10)
        m.rho_tol = 2.0  # every sigma_ml falls below the floor
        with pytest.warns(UserWarning, match="skipped"):
            est = estimate_r_hat(m, [0.1, 0.5])
        assert est.n_skipped == 2 and est.r_hat == 1.0

    def test_dense_design_below_one(self):
        rng = np.random.default_rng(3)
        m = model(ls=0.1)
        net = net_from_count(Domain(1), 50, 50)
        for c in net.centers:
            m.observe_offline(c, rng.normal(0, 0.1, net.replication))
        for x in rng.random(5):
            m.observe_online(x, *rng.standard_normal(2))
        holdout = np.linspace(0, 1, 64)
        est = estimate_r_hat(m, holdout)
        assert est.n_skipped == 0 and est.r_hat < 1.0

        k = joint_index_kernel(m.kernel, m.coupling.rho)
        q = [((x,), ML) for x in holdout]
        _, cov_all = reference_posterior(k, *reversed(stack_reference_obs(m)), q)
        _, cov_on = reference_posterior(k, *reversed(stack_reference_obs(m, offline=False)), q)
        ratio = np.clip(np.diag(cov_all) / np.diag(cov_on), 0, 1)
        assert est.r_hat == pytest.approx(ratio.max(), rel=1e-6)

    @given(extra=st.lists(st.floats(0, 1), min_size=1, max_size=4), reps=st.integers(1, 20))
    def test_monotone_in_offline_history(self, extra, reps):
        rng = np.random.default_rng(1)
        online = rng.random(3)
        holdout = np.linspace(0, 1, 33)

        def build(centers):
            m = model()
            for c, n in centers:
                m.observe_offline_mean(c, 0.0, n)
            for x in online:
                m.observe_online(x, 0.0, 0.0)
            return estimate_r_hat(m, holdout).r_hat

        base = [(0.2, 5), (0.7, 5)]
        r0 = build(base)
        assert build(base + [(c, reps) for c in extra]) <= r0 + 1e-8
        assert build([(0.2, 5 + reps), (0.7, 5)]) <= r0 + 1e-8


def test_snap_to_grid_ties_take_lowest():
    grid = np.array([[0.0], [0.5], [1.0]])
    assert snap_to_grid([[0.25], [0.26], [0.9]], grid).tolist() == [0, 1, 2]
