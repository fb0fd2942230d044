import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradhmc import data_io, mlp
from gradhmc.samplers import (
    Chain,
    ExactGradientOracle,
    HmcConfig,
    HmcSampler,
    NetGradientOracle,
    PerturbedGradientOracle,
    SghmcConfig,
    ZeroGradientOracle,
    leapfrog,
    run_chain,
    sghmc_run,
)
from gradhmc.targets import IllConditionedGaussianTarget, LogisticRegressionTarget


def gaussian_target(variances):
    return IllConditionedGaussianTarget(np.asarray(variances, dtype=float))


@pytest.fixture(scope="module")
def logistic():
    ds, _ = data_io.gen_logistic(400, 5, seed=20)
    return LogisticRegressionTarget(ds.X, ds.y)


def trained_net_for(target, seed=0, n=500, hidden=40, epochs=100):
    rng = np.random.default_rng(seed)
    Q = rng.standard_normal((n, target.dim)) * np.sqrt(target.variances)
    G = Q / target.variances
    net = mlp.MlpGradientNet(target.dim, hidden, seed=seed)
    mlp.train(net, Q, G, epochs=epochs, seed=seed)
    return net


class TestLeapfrog:
    def test_hand_computed_step(self):
        target = gaussian_target([1.0])
        oracle = ExactGradientOracle(target)
        q, p, ok = leapfrog(oracle, np.array([1.0]), np.array([0.0]), 1, 0.1)
        assert ok
        # p_half = -0.05, q1 = 1 - 0.1 * 0.05 = 0.995, p1 = -0.05 - 0.05 * 0.995
        assert q[0] == pytest.approx(0.995, abs=1e-15)
        assert p[0] == pytest.approx(-0.09975, abs=1e-15)

    def test_zero_oracle_free_particle(self):
        oracle = ZeroGradientOracle(3)
        q0 = np.array([1.0, -1.0, 0.5])
        p0 = np.array([0.2, 0.0, -0.4])
        q, p, ok = leapfrog(oracle, q0, p0, 7, 0.3)
        np.testing.assert_allclose(q, q0 + 7 * 0.3 * p0, rtol=1e-14)
        np.testing.assert_array_equal(p, p0)

    def test_oracle_call_count(self):
        target = gaussian_target([1.0, 2.0])
        oracle = ExactGradientOracle(target)
        leapfrog(oracle, np.zeros(2), np.ones(2), 13, 0.05)
        assert oracle.n_evals == 14

    def test_reversibility_two_dim(self):
        target = gaussian_target([1.0, 4.0])
        oracle = ExactGradientOracle(target)
        rng = np.random.default_rng(0)
        q0 = rng.standard_normal(2)
        p0 = rng.standard_normal(2)
        q1, p1, _ = leapfrog(oracle, q0, p0, 30, 0.05)
        q2, p2, _ = leapfrog(oracle, q1, -p1, 30, 0.05)
        np.testing.assert_allclose(q2, q0, atol=1e-10)
        np.testing.assert_allclose(-p2, p0, atol=1e-10)

    @settings(max_examples=25, deadline=None)
    @given(
        steps=st.integers(min_value=1, max_value=40),
        eps=st.floats(min_value=1e-3, max_value=0.3),
        seed=st.integers(min_value=0, max_value=10_000),
    )
    def test_reversibility_property(self, steps, eps, seed):
        target = gaussian_target([0.5, 1.0, 2.0])
        oracle = ExactGradientOracle(target)
        rng = np.random.default_rng(seed)
        q0 = rng.standard_normal(3)
        p0 = rng.standard_normal(3)
        q1, p1, _ = leapfrog(oracle, q0, p0, steps, eps)
        q2, p2, _ = leapfrog(oracle, q1, -p1, steps, eps)
        np.testing.assert_allclose(q2, q0, atol=1e-9)
        np.testing.assert_allclose(-p2, p0, atol=1e-9)

    def test_divergent_trajectory_flagged(self):
        class ExplodingOracle:
            n_evals = 0

            def __call__(self, q):
                with np.errstate(over="ignore"):
                    return -1e200 * q

        q, p, ok = leapfrog(ExplodingOracle(), np.ones(2), np.ones(2), 5, 1.0)
        assert not ok

    def test_fused_matches_generic_path(self):
        target = gaussian_target([1.0, 2.0, 0.5])
        net = trained_net_for(target, seed=1)
        oracle = NetGradientOracle(net)
        rng = np.random.default_rng(2)
        for _ in range(5):
            q0 = rng.standard_normal(3)
            p0 = rng.standard_normal(3)
            fused = leapfrog(oracle, q0, p0, 10, 0.1)
            generic = leapfrog(lambda q: net.forward(q), q0, p0, 10, 0.1)
            np.testing.assert_allclose(fused.q, generic.q, atol=1e-10)
            np.testing.assert_allclose(fused.p, generic.p, atol=1e-10)


class TestHmcStep:
    def test_tiny_step_acceptance(self):
        target = gaussian_target([1.0, 1.0])
        sampler = HmcSampler(
            target, ExactGradientOracle(target), 10, 1e-4, 0, np.zeros(2)
        )
        hits = sum(sampler.step()[1] for _ in range(1000))
        assert hits / 1000 > 0.999

    def test_rejected_draw_repeats_state(self):
        target = gaussian_target([1.0])
        chain = run_chain(
            target,
            ZeroGradientOracle(1),
            HmcConfig(leapfrog_steps=5, step_size=0.8, n_iterations=500, seed=3),
            np.zeros(1),
        )
        rejected = ~chain.accepted
        assert rejected.any()
        idx = np.where(rejected)[0]
        idx = idx[idx > 0]
        np.testing.assert_array_equal(chain.draws[idx], chain.draws[idx - 1])

    def test_eval_counters(self):
        target = gaussian_target([1.0, 2.0])
        oracle = ExactGradientOracle(target)
        cfg = HmcConfig(leapfrog_steps=7, step_size=0.1, n_iterations=50, seed=4)
        chain = run_chain(target, oracle, cfg, np.zeros(2))
        assert chain.counters["gradient_evals"] == 50 * 8
        # potential cached at the current state: one eval per iteration plus init
        assert chain.counters["potential_evals"] == 51

    def test_deterministic_given_seed(self):
        target = gaussian_target([1.0, 3.0])
        cfg = HmcConfig(leapfrog_steps=5, step_size=0.2, n_iterations=100, seed=7)
        a = run_chain(target, ExactGradientOracle(target), cfg, np.zeros(2))
        b = run_chain(target, ExactGradientOracle(target), cfg, np.zeros(2))
        np.testing.assert_array_equal(a.draws, b.draws)
        np.testing.assert_array_equal(a.accepted, b.accepted)


class TestRunChain:
    def test_one_dim_gaussian_moments(self):
        target = gaussian_target([1.0])
        cfg = HmcConfig(leapfrog_steps=3, step_size=0.5, n_iterations=20_000, seed=5)
        chain = run_chain(target, ExactGradientOracle(target), cfg, np.zeros(1))
        from gradhmc.diagnostics import ess

        x = chain.draws[2000:, 0]
        se_mean = 1.0 / np.sqrt(ess(chain.draws).minimum)
        assert abs(x.mean()) < 3 * se_mean
        # variance error bars come from the mixing of x^2, not of x
        se_var = np.sqrt(2.0 / ess(chain.draws**2).minimum)
        assert abs(x.var() - 1.0) < 3 * se_var

    def test_exactness_with_zero_oracle(self):
        # a useless gradient degrades mixing, never correctness
        target = gaussian_target([1.0])
        cfg = HmcConfig(leapfrog_steps=4, step_size=0.25, n_iterations=30_000, seed=6)
        chain = run_chain(target, ZeroGradientOracle(1), cfg, np.zeros(1))
        x = chain.draws[3000:, 0]
        assert abs(x.mean()) < 0.05
        assert abs(x.var() - 1.0) < 0.08

    def test_csv_round_trip(self, tmp_path):
        target = gaussian_target([1.0, 2.0])
        cfg = HmcConfig(leapfrog_steps=3, step_size=0.2, n_iterations=120, seed=8)
        chain = run_chain(target, ExactGradientOracle(target), cfg, np.zeros(2))
        path = tmp_path / "draws.csv"
        chain.to_csv(path)
        clone = Chain.from_csv(path)
        np.testing.assert_array_equal(clone.draws, chain.draws)
        np.testing.assert_array_equal(clone.accepted, chain.accepted)


class TestPerturbedOracle:
    def test_zero_bound_is_exact(self):
        target = gaussian_target([1.0, 2.0])
        oracle = PerturbedGradientOracle(target, bound=0.0, seed=0)
        rng = np.random.default_rng(9)
        for _ in range(20):
            q = rng.standard_normal(2)
            np.testing.assert_array_equal(oracle(q), target.gradient(q))

    @pytest.mark.parametrize("bound", [1.0, 0.1, 0.01])
    def test_norm_bound_holds(self, bound):
        target = gaussian_target([1.0, 2.0, 0.5])
        oracle = PerturbedGradientOracle(target, bound=bound, seed=1)
        rng = np.random.default_rng(10)
        for _ in range(1000):
            q = rng.standard_normal(3) * 3
            err = np.linalg.norm(oracle(q) - target.gradient(q))
            assert err <= bound + 1e-12

    def test_deterministic_field(self):
        target = gaussian_target([1.0, 1.0])
        oracle = PerturbedGradientOracle(target, bound=0.5, seed=2)
        q = np.array([0.3, -0.7])
        np.testing.assert_array_equal(oracle(q), oracle(q.copy()))


class TestSghmc:
    def test_reduces_to_hmc_with_full_batch_no_friction(self, logistic):
        cfg = SghmcConfig(
            step_size=0.05,
            n_leapfrog=8,
            minibatch_size=logistic.n_obs,
            friction=0.0,
            n_iterations=200,
            seed=21,
            mh_correction=True,
        )
        sg = sghmc_run(logistic, cfg, np.zeros(5))
        hmc_cfg = HmcConfig(leapfrog_steps=8, step_size=0.05, n_iterations=200, seed=21)
        ref = run_chain(logistic, ExactGradientOracle(logistic), hmc_cfg, np.zeros(5))
        np.testing.assert_array_equal(sg.draws, ref.draws)
        np.testing.assert_array_equal(sg.accepted, ref.accepted)

    def test_minibatch_runs_and_mixes(self, logistic):
        cfg = SghmcConfig(
            step_size=0.02,
            n_leapfrog=8,
            minibatch_size=100,
            friction=0.01,
            n_iterations=400,
            seed=22,
            mh_correction=True,
        )
        chain = sghmc_run(logistic, cfg, np.zeros(5))
        assert 0.0 < chain.acceptance < 1.0
        assert chain.meta["minibatch_size"] == 100

    def test_step_size_sensitivity_without_mh(self, logistic):
        # without the exact-potential test, the invariant distribution moves
        # with the step size; exact HMC seed pairs stay put
        from scipy.stats import ks_2samp

        def sg_draws(eps, seed):
            cfg = SghmcConfig(
                step_size=eps,
                n_leapfrog=10,
                minibatch_size=100,
                friction=0.05,
                n_iterations=1500,
                seed=seed,
                mh_correction=False,
            )
            return sghmc_run(logistic, cfg, np.zeros(5)).draws[300:, 0]

        def hmc_draws(seed):
            cfg = HmcConfig(leapfrog_steps=10, step_size=0.05, n_iterations=1500, seed=seed)
            return run_chain(
                logistic, ExactGradientOracle(logistic), cfg, np.zeros(5)
            ).draws[300:, 0]

        ks_sg = ks_2samp(sg_draws(0.05, 23), sg_draws(0.005, 24)).statistic
        ks_ref = ks_2samp(hmc_draws(25), hmc_draws(26)).statistic
        assert ks_sg > 2 * ks_ref
