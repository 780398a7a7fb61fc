"""Learning loop: logit rule, perception updates, payoff map, convergence."""

import math

import numpy as np
import pytest

from mgdtn import (
    ClassSpec,
    FixedRegret,
    GameSpec,
    LearnerConfig,
    MultiClassSpec,
    PerceptionState,
    contraction_margin,
    epsilon_bound,
    expected_payoff_map,
    fixed_point_residual,
    fully_mixed_ne,
    logit_policy,
    run_learning,
    update_perception,
)
from mgdtn import oracle

from conftest import interior_game


class TestLogitPolicy:
    def test_tie_is_half_for_any_beta(self):
        for beta in (0.01, 1.0, 50.0, math.inf):
            assert logit_policy((0.3, 0.3), beta) == 0.5

    def test_known_value(self):
        assert logit_policy((1.0, 0.0), math.log(9.0)) == pytest.approx(0.9, rel=1e-12)

    def test_small_beta_uniform(self):
        assert logit_policy((5.0, -3.0), 1e-12) == pytest.approx(0.5, abs=1e-9)

    def test_hard_max_limit(self):
        assert logit_policy((2.0, 1.0), math.inf) == 1.0
        assert logit_policy((1.0, 2.0), math.inf) == 0.0

    def test_overflow_safe(self):
        assert logit_policy((1e6, -1e6), 10.0) == 1.0
        assert logit_policy((-1e6, 1e6), 10.0) == 0.0

    def test_complementarity(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            x_t, x_s = rng.normal(size=2)
            beta = float(rng.uniform(0.1, 20))
            s_t = logit_policy((x_t, x_s), beta)
            s_s = logit_policy((x_s, x_t), beta)
            assert s_t + s_s == pytest.approx(1.0, abs=1e-12)

    def test_array_form(self):
        x = np.array([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
        out = logit_policy(x, math.log(9.0))
        assert out.shape == (3,)
        assert out[0] == pytest.approx(0.9)
        assert out[2] == 0.5


class TestUpdatePerception:
    def test_full_overwrite(self):
        assert update_perception((0.2, -0.1), "T", 0.7, 1.0) == (0.7, -0.1)

    def test_half_step(self):
        new = update_perception((0.2, 0.05), "T", 0.6, 0.5)
        assert new == (pytest.approx(0.4), 0.05)

    def test_unchosen_entry_bitwise_unchanged(self):
        x_s = 0.1234567890123456
        new = update_perception((0.2, x_s), "T", -1.0, 0.3)
        assert new[1] is not None and new[1] == x_s

    def test_geometric_convergence_to_constant(self):
        x = (0.0, 0.0)
        for k in range(1, 200):
            x = update_perception(x, "T", 0.42, 1.0 / k)
        assert x[0] == pytest.approx(0.42, abs=1e-12)

    def test_forms_agree(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            x = tuple(rng.normal(size=2))
            u, g = float(rng.normal()), float(rng.uniform(0.01, 1.0))
            a = update_perception(x, "S", u, g, form="blend")
            b = update_perception(x, "S", u, g, form="increment")
            assert a[1] == pytest.approx(b[1], rel=1e-12, abs=1e-15)

    def test_validation(self):
        with pytest.raises(ValueError):
            update_perception((0, 0), "T", 1.0, 0.0)
        with pytest.raises(ValueError):
            update_perception((0, 0), "X", 1.0, 0.5)


class TestExpectedPayoffMap:
    def test_all_opponents_silent(self, fig2_spec):
        from mgdtn import utility_active

        x = np.zeros((40, 2))
        x[:, 1] = 100.0  # everyone else locked silent
        x[0] = (0.0, 0.0)
        g = expected_payoff_map(fig2_spec, x, beta=50.0)
        assert g[0, 0] == pytest.approx(utility_active(fig2_spec, 1), rel=1e-10)
        assert g[0, 1] == pytest.approx(-g[0, 0], rel=1e-12)

    def test_uniform_sigma_reduces_to_binomial(self, fig2_spec):
        from mgdtn import indifference_fn

        x = np.zeros((40, 2))  # sigma = 1/2 for everyone
        g = expected_payoff_map(fig2_spec, x, beta=1.0)
        assert g[0, 0] == pytest.approx(indifference_fn(fig2_spec, 0.5), rel=1e-12)

    def test_heterogeneous_vs_enumeration(self, contact):
        spec = GameSpec(n=6, g=2.2e-3, r=1.0, contact=contact)
        rng = np.random.default_rng(2)
        x = rng.normal(scale=0.3, size=(6, 2))
        beta = 3.0
        sigmas = logit_policy(x, beta)
        g = expected_payoff_map(spec, x, beta)
        for i in range(6):
            enum = oracle.exact_expected_utility(spec, i, "T", list(sigmas))
            assert g[i, 0] == pytest.approx(enum, abs=1e-12)

    def test_fixed_regret_silent_column(self, contact):
        spec = GameSpec(n=5, g=1e-3, r=1.0, contact=contact, scenario=FixedRegret(0.02))
        g = expected_payoff_map(spec, np.zeros((5, 2)), beta=1.0)
        assert np.all(g[:, 1] == -0.02)

    def test_multiclass_silent_zero(self, contact):
        spec = MultiClassSpec(
            classes=(ClassSpec(3, 2e-3, 1.0), ClassSpec(3, 1e-3, 0.6)), contact=contact
        )
        g = expected_payoff_map(spec, np.zeros((6, 2)), beta=1.0)
        assert np.all(g[:, 1] == 0.0)


class TestContraction:
    def test_margin_arithmetic(self, contact):
        spec = GameSpec(n=10, g=1e-3, r=0.99, contact=contact)
        assert contraction_margin(spec, 0.5) == pytest.approx(1 / 0.99 - 0.5)
        assert contraction_margin(spec, 1 / 0.99) == pytest.approx(0.0, abs=1e-12)
        assert contraction_margin(spec, 1e9) < 0

    def test_empirical_lipschitz_ratio(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            spec = interior_game(rng, n_lo=4, n_hi=8)
            ns_r = spec.contact.num_sources * spec.r
            beta = float(rng.uniform(0.05, 0.9)) / ns_r
            bound = beta * ns_r
            for _ in range(40):
                x = rng.uniform(-2 * spec.r, 2 * spec.r, size=(spec.n, 2))
                x_hat = rng.uniform(-2 * spec.r, 2 * spec.r, size=(spec.n, 2))
                num = np.abs(
                    expected_payoff_map(spec, x, beta) - expected_payoff_map(spec, x_hat, beta)
                ).max()
                den = np.abs(x - x_hat).max()
                assert num <= bound * den + 1e-9


class TestEpsilonBound:
    def test_uniform_policy_value(self):
        x = np.zeros((3, 2))
        eps = epsilon_bound(x, beta=10.0)
        assert eps.applicable
        assert eps.value == pytest.approx((math.log(2) + 1) / 10.0, rel=1e-12)

    def test_concentrated_policy_tends_to_reciprocal_beta(self):
        x = np.array([[50.0, -50.0]])
        eps = epsilon_bound(x, beta=10.0)
        assert eps.value == pytest.approx(0.1, rel=1e-3)

    def test_hard_max_flagged_inapplicable(self):
        eps = epsilon_bound(np.zeros((2, 2)), beta=math.inf)
        assert eps.value == 0.0
        assert not eps.applicable

    def test_upper_bound(self):
        rng = np.random.default_rng(4)
        beta = 7.0
        x = rng.normal(size=(20, 2))
        assert epsilon_bound(x, beta).value <= (math.log(2) + 1) / beta + 1e-12


class TestRunLearning:
    def test_deterministic_given_seed(self, contact):
        spec = GameSpec(n=8, g=2e-3, r=1.0, contact=contact, scenario=FixedRegret(0.0))
        cfg = LearnerConfig(beta=10.0, max_rounds=500, eps_stop=1e-15)
        a = run_learning(spec, cfg, seed=77)
        b = run_learning(spec, cfg, seed=77)
        assert np.array_equal(a.state.x, b.state.x)
        assert np.array_equal(a.trajectory.actions, b.trajectory.actions)

    def test_update_forms_identical_trajectories(self, contact):
        spec = GameSpec(n=6, g=2.2e-3, r=1.0, contact=contact)
        cfg = LearnerConfig(beta=5.0, max_rounds=2000, eps_stop=1e-15)
        a = run_learning(spec, cfg, seed=5, update_form="increment")
        b = run_learning(spec, cfg, seed=5, update_form="blend")
        assert np.array_equal(a.trajectory.actions, b.trajectory.actions)
        assert np.allclose(a.state.x, b.state.x, rtol=1e-9, atol=1e-12)

    def test_unconverged_flag_not_exception(self, contact):
        spec = GameSpec(n=6, g=2.2e-3, r=1.0, contact=contact)
        cfg = LearnerConfig(beta=math.inf, max_rounds=50, eps_stop=1e-15)
        res = run_learning(spec, cfg, seed=1)
        assert not res.converged
        assert res.rounds == 50

    def test_exact_mode_converges_to_fixed_point(self, contact):
        spec = GameSpec(n=6, g=2.2e-3, r=1.0, contact=contact)
        beta = 0.03 / spec.r
        cfg = LearnerConfig(beta=beta, max_rounds=30_000, eps_stop=1e-15, payoff_mode="exact")
        res = run_learning(spec, cfg, seed=9)
        assert fixed_point_residual(spec, res.state.x, beta) < 1e-6
        x_star = oracle.fixed_point_oracle(spec, beta)
        assert np.abs(res.state.x - x_star).max() < 1e-6

    def test_exact_mode_rejects_threshold_spec(self, contact):
        from mgdtn import CostDistribution, ThresholdGameSpec

        spec = ThresholdGameSpec(
            n=4, reward=1.0, contact=contact, costs=CostDistribution.exponential(0.005)
        )
        with pytest.raises(ValueError):
            run_learning(spec, LearnerConfig(payoff_mode="exact"), seed=0)

    def test_threshold_spec_simulated_learning(self, contact):
        from mgdtn import CostDistribution, ThresholdGameSpec

        spec = ThresholdGameSpec(
            n=10, reward=2.0, contact=contact, costs=CostDistribution.exponential(0.005)
        )
        cfg = LearnerConfig(beta=200.0, max_rounds=2000, eps_stop=1e-15)
        res = run_learning(spec, cfg, seed=3)
        assert res.rounds == 2000
        assert res.trajectory.sigma.shape == (2000, 10)

    def test_anneal_schedule_smoke(self, contact):
        # exact mode so perception changes stay nonzero and the run reaches
        # the hard-max phase (simulated zero-payoff rounds can legitimately
        # trip the Algorithm-1 guard at tiny N)
        spec = GameSpec(n=6, g=2.2e-3, r=1.0, contact=contact, scenario=FixedRegret(0.0))
        cfg = LearnerConfig(
            beta=math.inf, max_rounds=800, eps_stop=1e-300, payoff_mode="exact",
            anneal_rounds=400, beta_start=1.0, beta_cap=1000.0,
        )
        res = run_learning(spec, cfg, seed=21)
        assert res.rounds > 400
        # soft phase yields interior probabilities, hard tail saturates
        assert 0.0 < res.trajectory.sigma[10].min() <= res.trajectory.sigma[10].max() < 1.0
        tail = res.trajectory.sigma[-1]
        assert set(np.unique(tail)).issubset({0.0, 0.5, 1.0})

    def test_trajectory_csv_export(self, contact, tmp_path):
        spec = GameSpec(n=4, g=2.2e-3, r=1.0, contact=contact)
        cfg = LearnerConfig(beta=5.0, max_rounds=40, eps_stop=1e-15, snapshot_stride=10)
        res = run_learning(spec, cfg, seed=2)
        path = tmp_path / "traj.csv"
        res.trajectory.to_csv(path, stride=2)
        lines = path.read_text().splitlines()
        assert lines[0] == "round,relay,class,sigma_T,action,payoff,x_T,x_S"
        # strided rounds plus the snapshot rounds, 4 relays each
        strided = set(range(1, 41, 2)) | {10, 20, 30, 40}
        assert len(lines) == 1 + len(strided) * 4
        # snapshot rounds carry perception columns, others leave them empty
        with_x = [ln for ln in lines[1:] if not ln.endswith(",,")]
        assert with_x and all(int(ln.split(",")[0]) % 10 == 0 for ln in with_x)


class TestConvergenceSuite:
    def test_exact_mode_suite_small(self):
        # smaller pre-check of the acceptance criterion-8 sweep
        rng = np.random.default_rng(6)
        for _ in range(4):
            spec = interior_game(rng, n_lo=4, n_hi=7)
            ns_r = spec.contact.num_sources * spec.r
            beta = float(rng.uniform(0.01, 0.05)) / ns_r
            cfg = LearnerConfig(beta=beta, max_rounds=30_000, eps_stop=1e-15, payoff_mode="exact")
            res = run_learning(spec, cfg, seed=int(rng.integers(1 << 30)))
            resid = fixed_point_residual(spec, res.state.x, beta)
            assert resid < 1e-6, resid
            # certificate: best deviation gains at most epsilon
            g = expected_payoff_map(spec, res.state.x, beta)
            sig = logit_policy(res.state.x, beta)
            value = sig * g[:, 0] + (1 - sig) * g[:, 1]
            best = np.maximum(g[:, 0], g[:, 1])
            eps = epsilon_bound(res.state.x, beta)
            assert np.all(best - value <= eps.value + 1e-9)
