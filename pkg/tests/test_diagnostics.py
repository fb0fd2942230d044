import numpy as np
import pytest

from gradhmc.diagnostics import compare_chains, ess, format_speed_table, speed_report
from gradhmc.samplers import Chain


def ar1(n, rho, seed, sd=1.0):
    rng = np.random.default_rng(seed)
    x = np.empty(n)
    x[0] = rng.standard_normal()
    innov = rng.standard_normal(n) * np.sqrt(1.0 - rho**2)
    for t in range(1, n):
        x[t] = rho * x[t - 1] + innov[t]
    return sd * x


class TestEss:
    def test_iid_draws(self):
        rng = np.random.default_rng(0)
        rep = ess(rng.standard_normal(10_000), burn_in=0.0)
        assert 0.9 * 10_000 <= rep.minimum <= 1.1 * 10_000

    @pytest.mark.parametrize("rho", [0.0, 0.5, 0.9])
    def test_ar1_analytic(self, rho):
        n = 50_000
        x = ar1(n, rho, seed=1)
        rep = ess(x, burn_in=0.0)
        expected = n * (1 - rho) / (1 + rho)
        assert abs(rep.median - expected) < 0.1 * expected

    def test_constant_chain_degenerate(self):
        rep = ess(np.ones(1000), burn_in=0.0)
        assert rep.degenerate and rep.minimum == 1.0

    def test_affine_invariance(self):
        x = ar1(20_000, 0.5, seed=2)
        a = ess(x, burn_in=0.0).median
        b = ess(1000.0 * x + 5.0, burn_in=0.0).median
        assert a == pytest.approx(b, rel=1e-9)

    def test_burn_in_removal(self):
        x = np.concatenate([np.full(1000, 100.0), ar1(9000, 0.0, seed=3)])
        rep = ess(x, burn_in=0.1)
        assert rep.minimum > 5000  # the flat prefix was dropped

    def test_bounds(self):
        x = ar1(5000, 0.95, seed=4)
        rep = ess(x, burn_in=0.0)
        assert 1.0 <= rep.minimum <= 5000

    def test_requires_enough_draws(self):
        with pytest.raises(ValueError):
            ess(np.random.default_rng(0).standard_normal(50), burn_in=0.0)


class TestCompareChains:
    def test_chain_vs_itself(self):
        rng = np.random.default_rng(5)
        draws = rng.standard_normal((2000, 3))
        out = compare_chains(draws, draws, burn_in=0.0)
        np.testing.assert_array_equal(out["ks_distance"], np.zeros(3))
        np.testing.assert_array_equal(out["mean_gap_se_units"], np.zeros(3))

    def test_seed_pair_within_mc_error(self):
        a = np.column_stack([ar1(20_000, 0.3, seed=6), ar1(20_000, 0.3, seed=7)])
        b = np.column_stack([ar1(20_000, 0.3, seed=8), ar1(20_000, 0.3, seed=9)])
        out = compare_chains(a, b, burn_in=0.1)
        assert np.all(out["mean_gap_se_units"] < 3.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            compare_chains(np.zeros((200, 2)), np.zeros((200, 3)))


def _chain_from(draws, seconds):
    n = draws.shape[0]
    return Chain(
        draws=draws,
        accepted=np.ones(n, dtype=bool),
        delta_h=np.zeros(n),
        timings={"sample_s": seconds},
    )


class TestSpeedReport:
    def test_baseline_speedup_is_one(self):
        rng = np.random.default_rng(10)
        chain = _chain_from(rng.standard_normal((2000, 2)), 4.0)
        rows, table = speed_report([("base", chain)], baseline=0)
        assert rows[0]["speed_up"] == 1.0
        assert "base" in table

    def test_speedup_ratio(self):
        rng = np.random.default_rng(11)
        draws = rng.standard_normal((5000, 2))
        fast = _chain_from(draws, 1.0)
        slow = _chain_from(draws.copy(), 10.0)
        rows, _ = speed_report([("slow", slow), ("fast", fast)], baseline=0)
        assert rows[1]["speed_up"] == pytest.approx(10.0, rel=1e-9)

    def test_surrogate_phases_are_charged(self):
        rng = np.random.default_rng(12)
        chain = _chain_from(rng.standard_normal((2000, 1)), 1.0)
        chain.timings.update({"collect_s": 2.0, "train_s": 1.0})
        rows, _ = speed_report([("nn", chain)], baseline=0)
        assert rows[0]["cpu_time_s"] == pytest.approx(4.0)

    def test_missing_timing_is_an_error(self):
        chain = Chain(
            draws=np.zeros((200, 1)),
            accepted=np.ones(200, dtype=bool),
            delta_h=np.zeros(200),
        )
        with pytest.raises(ValueError):
            speed_report([("broken", chain)])

    def test_table_is_aligned(self):
        rng = np.random.default_rng(13)
        rows, table = speed_report(
            [("a", _chain_from(rng.standard_normal((1000, 1)), 1.0))]
        )
        lines = table.splitlines()
        assert len(lines) == 2
        assert lines[0].startswith("Method")
