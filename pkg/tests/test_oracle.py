"""The brute-force oracle itself: small closed-form cases and report plumbing."""

import math

import numpy as np
import pytest

from mgdtn import ContactParams, FixedRegret, GameSpec, success_prob_first, utility_active
from mgdtn import oracle


def test_exact_expected_utility_degenerate_profile(contact):
    spec = GameSpec(n=5, g=2e-3, r=1.0, contact=contact)
    # all opponents pure: collapses to the single-profile utility
    value = oracle.exact_expected_utility(spec, 0, "T", [0.3, 1.0, 1.0, 0.0, 0.0])
    assert value == pytest.approx(utility_active(spec, 3), rel=1e-12)


def test_exact_expected_utility_silent_side(contact):
    spec = GameSpec(n=4, g=2e-3, r=1.0, contact=contact)
    # zero-sum silent value is minus the value of joining the two sure actives
    value = oracle.exact_expected_utility(spec, 0, "S", [0.5, 1.0, 1.0, 0.0])
    assert value == pytest.approx(-utility_active(spec, 3), rel=1e-12)


def test_exact_expected_utility_regret_silent(contact):
    spec = GameSpec(n=4, g=2e-3, r=1.0, contact=contact, scenario=FixedRegret(0.03))
    assert oracle.exact_expected_utility(spec, 1, "S", [0.4, 0.2, 0.9, 0.1]) == -0.03


def test_refuses_oversized_instances(contact):
    spec = GameSpec(n=25, g=2e-3, r=1.0, contact=contact)
    with pytest.raises(ValueError):
        oracle.exact_expected_utility(spec, 0, "T", [0.5] * 25)
    with pytest.raises(ValueError):
        oracle.enumerate_pure_ne(spec)


def test_grid_finds_nothing_without_equilibrium(contact):
    # reward too small for anyone: the deviation gap never changes sign
    spec = GameSpec(n=6, g=0.05, r=1.0, contact=contact)
    assert oracle.grid_mixed_ne(spec, 500) == []


def test_fixed_point_oracle_is_fixed_point(contact):
    spec = GameSpec(n=5, g=2.2e-3, r=1.0, contact=contact)
    beta = 0.02
    x_star = oracle.fixed_point_oracle(spec, beta, tol=1e-11)
    sig = 1.0 / (1.0 + np.exp(-beta * (x_star[:, 0] - x_star[:, 1])))
    for i in range(5):
        assert oracle.exact_expected_utility(spec, i, "T", list(sig)) == pytest.approx(
            x_star[i, 0], abs=1e-9
        )


def test_zero_perceptions_not_fixed_point(contact):
    spec = GameSpec(n=5, g=2.2e-3, r=1.0, contact=contact)
    sig = [0.5] * 5
    g_t = oracle.exact_expected_utility(spec, 0, "T", sig)
    assert abs(g_t) > 1e-3  # G(0) != 0 whenever payoffs are nonzero


def test_report_verdicts_and_csv(tmp_path):
    rep = oracle.OracleReport(instance="toy")
    rep.add("a", "PASS", 1e-12)
    rep.add("b", "RECORDED", 2.0)
    assert not rep.failed
    assert rep.max_discrepancy == 2.0
    rep.add("c", "FAIL", 0.1)
    assert rep.failed
    with pytest.raises(ValueError):
        rep.add("d", "MAYBE")
    path = tmp_path / "rep.csv"
    rep.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "instance,check,verdict,discrepancy"
    assert len(lines) == 4
    assert "oracle report: toy" in rep.to_text()


def test_compare_random_suite_small():
    reports = oracle.compare_random_suite(seed=7, instances=6, n_max=8)
    assert len(reports) == 6
    assert not any(r.failed for r in reports)


def test_compare_random_suite_threaded_matches_serial():
    serial = oracle.compare_random_suite(seed=3, instances=4, n_max=7, workers=1)
    threaded = oracle.compare_random_suite(seed=3, instances=4, n_max=7, workers=4)
    assert [r.instance for r in serial] == [r.instance for r in threaded]
    assert [r.checks for r in serial] == [r.checks for r in threaded]
