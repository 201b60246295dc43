import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pa_gp_ucb.acquisition import BetaSchedule
from pa_gp_ucb.algorithms import (ALGORITHMS, RunConfig, make_environment, regret, run, run_naive, run_pa_gp_ucb,
                                  run_vanilla_gp_ucb)
from pa_gp_ucb.errors import InputError, OracleError
from pa_gp_ucb.gp_core import Domain, KernelSpec
from pa_gp_ucb.joint_model import NoiseSpec, TaskCoupling
from pa_gp_ucb.offline_design import net_from_count
from pa_gp_ucb.oracles import Environment, EnvironmentSpec, GroundPair


def small(rho=0.8, T=15, grid=64, M=8, N=5, seed=0, **kw):
    return RunConfig(env=EnvironmentSpec(seed=seed, grid_size=grid), kernel=KernelSpec(0.1),
                     coupling=TaskCoupling(rho), noise=NoiseSpec(0.01, 0.01), horizon=T,
                     net=net_from_count(Domain(1), M, N), seed=seed, **kw)


class FailingEnvironment(Environment):
    """Truth oracle gives up after ``budget`` calls."""

    def __init__(self, base: Environment, budget: int):
        super().__init__(base.spec, base.ground, base.eta_sq, base.eta_ml_sq)
        self.budget = budget

    def query_index(self, i, which, rng):
        if which == "truth":
            if self.budget <= 0:
                raise OracleError("truth oracle unavailable")
            self.budget -= 1
        return super().query_index(i, which, rng)


class TestConfig:
    def test_bad_horizon(self):
        with pytest.raises(InputError):
            RunConfig(horizon=0)

    def test_bad_algorithm(self):
        with pytest.raises(InputError):
            RunConfig(algorithm="thompson")

    @pytest.mark.parametrize("alg", ["pa", "naive_offline", "naive_offline_online"])
    def test_net_required(self, alg):
        with pytest.raises(InputError, match="net"):
            run(small(algorithm=alg).replace(net=None))

    def test_vanilla_without_net(self):
        assert len(run(small(algorithm="vanilla").replace(net=None))) == 15

    def test_wrapper_checks_algorithm(self):
        with pytest.raises(InputError):
            run_pa_gp_ucb(small(algorithm="vanilla"))
        with pytest.raises(InputError):
            run_naive(small(algorithm="pa"))
        assert run_vanilla_gp_ucb(small(algorithm="vanilla")).algorithm == "vanilla"


class TestReductions:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_rho_zero_all_agree(self, seed):
        cfg = small(rho=0.0, seed=seed, T=20)
        env = make_environment(cfg)
        seqs = {alg: run(cfg.replace(algorithm=alg), env).indices for alg in ALGORITHMS}
        for alg in ALGORITHMS:
            assert np.array_equal(seqs[alg], seqs["vanilla"]), alg

    def test_rho_zero_matches_offline_deleted(self):
        cfg = small(rho=0.0, T=20, seed=4)
        env = make_environment(cfg)
        full = run(cfg, env)
        bare = run(cfg.replace(net=net_from_count(Domain(1), 8, 0)), env)
        for name in ("indices", "x", "f_x", "inst_regret", "cum_regret"):
            assert np.max(np.abs(getattr(full, name) - getattr(bare, name))) < 1e-9, name
        # the offline stage draws from its own stream, so online noise is shared too
        assert np.max(np.abs(full.y - bare.y)) < 1e-9

    @pytest.mark.parametrize("seed", [0, 3])
    def test_empty_offline_reductions(self, seed):
        cfg = small(N=0, T=20, seed=seed)
        env = make_environment(cfg)
        seq = {alg: run(cfg.replace(algorithm=alg), env).indices for alg in ALGORITHMS}
        # no offline data: the correction is inert and the offline-only baseline is plain GP-UCB
        assert np.array_equal(seq["pa"], seq["naive_offline_online"])
        assert np.array_equal(seq["naive_offline"], seq["vanilla"])

    def test_empty_offline_naive_pair_agrees_when_uncoupled(self):
        cfg = small(rho=0.0, N=0, T=20, seed=3)
        env = make_environment(cfg)
        a = run(cfg.replace(algorithm="naive_offline"), env)
        b = run(cfg.replace(algorithm="naive_offline_online"), env)
        assert np.array_equal(a.indices, b.indices)


class TestTrace:
    cfg = small(T=25, seed=6)
    env = make_environment(cfg)

    @pytest.mark.parametrize("alg", ALGORITHMS)
    def test_monotone_and_bounded(self, alg):
        tr = run(self.cfg.replace(algorithm=alg), self.env)
        g = self.env.ground
        assert len(tr) == 25 and tr.failure is None
        assert np.all(np.diff(tr.cum_regret) >= 0)
        assert np.all(tr.inst_regret >= 0) and np.all(tr.inst_regret <= g.f_star - g.f_table.min())
        assert np.all(np.isfinite(tr.y)) and np.all(np.isfinite(tr.y_ml))

    def test_seed_determinism(self):
        a, b = run(self.cfg), run(self.cfg)
        for name in ("indices", "x", "y", "y_ml", "f_x", "inst_regret", "cum_regret"):
            assert np.array_equal(getattr(a, name), getattr(b, name))
        assert a.diagnostics == b.diagnostics and a.run_id == b.run_id == "pa-6"

    def test_resummation(self):
        rng = np.random.default_rng(0)
        g = self.env.ground
        picks = rng.integers(0, len(g.grid), 10)
        r, R = regret(g.grid[picks], g)
        assert R == pytest.approx(sum(g.f_star - g.f_table[i] for i in picks), abs=1e-12)
        assert np.array_equal(r, g.f_star - g.f_table[picks])

    def test_regret_at_optimum_and_minimum(self):
        g = self.env.ground
        assert regret(np.repeat(g.x_star[None], 4, 0), g)[1] == 0.0
        lo = int(np.argmin(g.f_table))
        assert regret(g.grid[lo:lo + 1], g)[1] == g.f_star - g.f_table.min()

    def test_regret_off_grid(self):
        with pytest.raises(InputError):
            regret([[0.5001]], self.env.ground)

    def test_trace_regret_matches_lookup(self):
        tr = run(self.cfg)
        r, R = regret(tr.x, self.env.ground)
        assert np.array_equal(r, tr.inst_regret) and R == pytest.approx(tr.final_regret, abs=1e-12)

    @pytest.mark.parametrize("alg", ["pa", "vanilla"])
    def test_first_round_tie_break(self, alg):
        cfg = small(T=1, algorithm=alg).replace(net=net_from_count(Domain(1), 1, 0))
        assert run(cfg).indices.tolist() == [0]

    def test_random_init(self):
        cfg = small(T=3, random_init=True, seed=9)
        a, b = run(cfg), run(cfg)
        assert a.indices[0] == b.indices[0]
        firsts = {run(cfg.replace(seed=s)).indices[0] for s in range(6)}
        assert len(firsts) > 1

    def test_pa_diagnostics(self):
        d = run(self.cfg).diagnostics
        assert d["max_pa_excess"] <= 1e-10 and d["max_aug_excess"] <= 1e-8 and 0 <= d["r_hat"] <= 1

    def test_failure_marker(self):
        tr = run(self.cfg, FailingEnvironment(self.env, budget=7))
        assert len(tr) == 7 and tr.failure.startswith("round 8") and "unavailable" in tr.failure


@pytest.mark.parametrize("alg", ALGORITHMS)
def test_constant_function_never_regrets(alg):
    grid = np.linspace(0, 1, 32)[:, None]
    ground = GroundPair(grid, np.full(32, 0.7), np.full(32, 0.7))
    env = Environment(EnvironmentSpec(grid_size=32), ground, 0.0, 0.0)
    tr = run(small(T=12, grid=32, algorithm=alg), env)
    assert np.all(tr.inst_regret == 0.0)


@settings(max_examples=15)
@given(seed=st.integers(0, 10_000), beta=st.floats(0.5, 20.0))
def test_fixed_beta_rho_zero_reduction(seed, beta):
    cfg = small(rho=0.0, T=8, grid=48, seed=seed, beta=BetaSchedule("fixed", value=beta))
    env = make_environment(cfg)
    pa = run(cfg, env).indices
    assert np.array_equal(pa, run(cfg.replace(algorithm="vanilla"), env).indices)
