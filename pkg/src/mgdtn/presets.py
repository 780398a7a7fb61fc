"""Named experiment presets, one per benchmark figure plus the oracle suite.

Every preset is an ordinary experiment config (same schema as user config
files), so ``--set`` overrides apply to presets too.  The network constants
lambda = 0.03 and tau = 100 are shared by all of them.

The learning presets run 40 independent source contests per round with the
per-source rewards scaled to keep n_s * r_j at the headline values; the
equilibria depend only on that product, while the concentration of realized
payoffs is what lets the hard-max/large-beta runs settle (see README).
"""

from __future__ import annotations

from .config import ExperimentConfig

__all__ = ["PRESETS", "preset_config", "preset_catalogue"]

_CONTACT = {"lambda": "0.03", "tau": "100", "sources": "1"}
_CONTACT40 = {"lambda": "0.03", "tau": "100", "sources": "40"}

# fig2/fig3 share one simulation, as do fig4/fig5: each pair is the two
# panels of one run and uses the same seed, so the trajectories agree.
_HOMOG_LEARN = {
    "experiment": {"kind": "learn", "seed": "20260810"},
    "contact": dict(_CONTACT40),
    "game": {"n": "40", "g": "6.6e-4", "psi_target": "15", "scenario": "zero_sum"},
    "learn": {
        "target": "game",
        "beta": "inf",
        "rounds": "30000",
        "eps": "1e-12",
        "anneal_rounds": "15000",
        "beta_start": "50",
        "beta_cap": "20000",
    },
}

_SYM_2CLASS_LEARN = {
    "experiment": {"kind": "learn", "seed": "20260810"},
    "contact": dict(_CONTACT40),
    "class.1": {"count": "20", "g": "0.8e-4", "psi_target": "30"},
    "class.2": {"count": "20", "g": "0.5e-4", "psi_target": "30"},
    "learn": {
        "target": "multiclass",
        "beta": "30000",
        "rounds": "30000",
        "eps": "1e-12",
        "anneal_rounds": "10000",
        "beta_start": "50",
    },
}

_ASYM_2CLASS_LEARN = {
    "experiment": {"kind": "learn", "seed": "20260810"},
    "contact": dict(_CONTACT40),
    # headline rewards r1=0.2, r2=0.14 split across the 40 sources
    "class.1": {"count": "20", "g": "0.8e-4", "r": "0.005"},
    "class.2": {"count": "20", "g": "0.5e-4", "r": "0.0035"},
    "learn": {
        "target": "multiclass",
        "beta": "10000",
        "rounds": "30000",
        "eps": "1e-12",
        "anneal_rounds": "10000",
        "beta_start": "50",
    },
}

PRESETS: dict = {
    "fig1": (
        "two-class mixed equilibrium (p1*, p2*) swept over the class-1 reward",
        {
            "experiment": {"kind": "multiclass", "seed": "20260810"},
            "contact": dict(_CONTACT),
            "class.1": {"count": "20", "g": "0.8e-4", "r": "0.24"},
            "class.2": {"count": "20", "g": "0.5e-4", "r": "0.15"},
            "fig1": {"r1_lo": "0.05", "r1_hi": "0.40", "r1_steps": "36"},
        },
    ),
    "fig2": (
        "homogeneous learning, per-relay activation probabilities (hard-max tail)",
        _HOMOG_LEARN,
    ),
    "fig3": (
        "homogeneous learning, active-count trajectory of the fig2 run",
        _HOMOG_LEARN,
    ),
    "fig4": (
        "two-class symmetric learning, per-class activation probabilities",
        _SYM_2CLASS_LEARN,
    ),
    "fig5": (
        "two-class symmetric learning, active counts plus the analytic equilibrium",
        _SYM_2CLASS_LEARN,
    ),
    "fig6": (
        "two-class asymmetric learning (headline rewards r1=0.2, r2=0.14)",
        _ASYM_2CLASS_LEARN,
    ),
    "fig7": (
        "cost-threshold surfaces: Theta(g, R), expected actives over (mu, R), g_th(R)",
        {
            "experiment": {"kind": "threshold", "seed": "20260810"},
            "contact": dict(_CONTACT),
            "threshold": {"n": "40", "reward": "10"},
            "costs": {"kind": "exponential", "mean": "0.005"},
            "fig7": {
                "g_steps": "60",
                "r_values": "2,4,6,8,10,12",
                "mu_lo": "0.001",
                "mu_hi": "0.010",
                "mu_steps": "19",
                "psi_quote": "20",
            },
        },
    ),
    "oracle-suite": (
        "randomized small instances: solver results vs brute-force enumeration",
        {
            "experiment": {"kind": "oracle", "seed": "20260810"},
            "oracle": {"instances": "50", "n_max": "12"},
        },
    ),
}


def preset_config(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise KeyError(name)
    _, sections = PRESETS[name]
    cfg = ExperimentConfig(
        kind=sections["experiment"]["kind"],
        sections={s: dict(kv) for s, kv in sections.items()},
        name=name,
    )
    return cfg


def preset_catalogue() -> list:
    """(name, description) rows; names are stable identifiers."""
    return [(name, desc) for name, (desc, _) in PRESETS.items()]
