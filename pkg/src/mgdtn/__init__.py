"""Minority-game incentive mechanisms for delay-tolerant networks.

Solvers for every equilibrium class of the relay-activation game (pure,
fully mixed, mixer/non-mixer, multi-class, cost-threshold), a seeded Monte
Carlo round simulator, the distributed reinforcement-learning loop that
finds the equilibria without coordination, and brute-force oracles that
verify all of it at small scale.
"""

from .contact import (
    ContactParams,
    DeliveryTarget,
    TargetActives,
    delivery_prob,
    failure_prob,
    reward_for_target,
    success_prob_first,
    target_actives,
)
from .game import (
    FixedRegret,
    GameSpec,
    MixedProfile,
    NoInteriorEquilibrium,
    PartialMixedEq,
    PureEquilibria,
    ZeroSum,
    comfort_level,
    enumerate_partial_eqs,
    fully_mixed_ne,
    indifference_fn,
    partial_mixed_ne,
    pure_ne,
    utility_active,
    utility_silent,
    v_s,
    v_t,
)
from .learning import (
    EpsilonBound,
    LearnerConfig,
    LearningResult,
    PerceptionState,
    Trajectory,
    contraction_margin,
    epsilon_bound,
    expected_payoff_map,
    fixed_point_residual,
    logit_policy,
    run_learning,
    update_perception,
)
from .multiclass import (
    ClassSpec,
    MultiClassSpec,
    TwoClassMixedEq,
    class_utility_active,
    design_rewards,
    fully_mixed_ne_2class,
    fully_mixed_ne_multiclass,
    implied_target,
    indifference_pair,
    pure_ne_profiles,
    pure_targets,
)
from .roundsim import (
    RoundOutcome,
    estimate_success_prob,
    play_round,
    realize_costs,
    replication_rng,
    sample_delivery_time,
)
from .threshold import (
    CostDistribution,
    ThresholdGameSpec,
    ThresholdResult,
    expected_actives,
    reward_from_mean,
    solve_threshold,
    theta,
)

__version__ = "0.1.0"
