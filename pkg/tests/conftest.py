import numpy as np
import pytest

from mgdtn import ContactParams, GameSpec, ZeroSum, reward_for_target

# the benchmark mobility environment used throughout the numerical results
LAM, TAU = 0.03, 100.0


@pytest.fixture(scope="session")
def contact():
    return ContactParams(lam=LAM, tau=TAU)


@pytest.fixture(scope="session")
def fig2_spec(contact):
    """Homogeneous benchmark: N=40, g=6.6e-4, reward tuned for 15 actives."""
    r = reward_for_target(contact, 6.6e-4, 15)
    return GameSpec(n=40, g=6.6e-4, r=r, contact=contact, scenario=ZeroSum())


def interior_game(rng, contact_params=None, n_lo=4, n_hi=12, scenario=None):
    """Random homogeneous spec whose fully mixed equilibrium is interior."""
    from mgdtn import FixedRegret, success_prob_first

    if contact_params is None:
        contact_params = ContactParams(
            lam=float(rng.uniform(0.01, 0.06)),
            tau=float(rng.uniform(50.0, 200.0)),
            num_sources=int(rng.integers(1, 3)),
        )
    n = int(rng.integers(n_lo, n_hi + 1))
    r = float(rng.uniform(0.2, 1.5))
    p_hi = success_prob_first(contact_params, 1)
    p_lo = success_prob_first(contact_params, n)
    frac = float(rng.uniform(0.15, 0.85))
    g = contact_params.num_sources * r * (p_lo + frac * (p_hi - p_lo)) / contact_params.tau
    if scenario is None:
        scenario = ZeroSum()
    return GameSpec(n=n, g=g, r=r, contact=contact_params, scenario=scenario)
