"""User-dependent private energy costs under incomplete information.

Each relay knows its own cost g_i; only the population distribution F of
costs is common knowledge.  A relay that activates against K other actives
(K ~ Binomial(N-1, F(g)) when everyone below cost level g activates) expects

    Theta(g) = E[ r * P_first(K+1) ] - g * tau,

which is strictly decreasing in g, so the game has a threshold equilibrium:
activate iff g_i <= g_th, with g_th the unique zero of Theta.  Sources that
only know the mean cost set the reward through r * P_first(Psi) = mu * tau,
which can overpay whenever g_th < mu.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._numeric import binom_pmf, bisect_decreasing
from .contact import ContactParams, success_prob_first

__all__ = [
    "CostDistribution",
    "ThresholdGameSpec",
    "ThresholdResult",
    "theta",
    "solve_threshold",
    "reward_from_mean",
    "expected_actives",
]


@dataclass(frozen=True)
class CostDistribution:
    """Cost CDF: uniform on [lo, hi], exponential with a given mean, or the
    right-continuous step function of an empirical sample."""

    kind: str
    lo: float = 0.0
    hi: float = 0.0
    mean_param: float = 0.0
    samples: Optional[tuple] = None

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "CostDistribution":
        if not (0.0 <= lo < hi):
            raise ValueError("need 0 <= lo < hi")
        return cls(kind="uniform", lo=lo, hi=hi)

    @classmethod
    def exponential(cls, mean: float) -> "CostDistribution":
        if not (math.isfinite(mean) and mean > 0):
            raise ValueError("mean must be finite and > 0")
        return cls(kind="exponential", mean_param=mean)

    @classmethod
    def empirical(cls, samples: Sequence[float]) -> "CostDistribution":
        vals = tuple(sorted(float(s) for s in samples))
        if not vals:
            raise ValueError("empirical distribution needs at least one sample")
        if vals[0] < 0:
            raise ValueError("energy costs must be >= 0")
        return cls(kind="empirical", samples=vals)

    @classmethod
    def from_file(cls, path) -> "CostDistribution":
        """Load an empirical distribution from a one-cost-per-line text file."""
        with open(path) as fh:
            vals = [float(line) for line in fh if line.strip()]
        return cls.empirical(vals)

    def cdf(self, g: float) -> float:
        if g < 0:
            return 0.0
        if self.kind == "uniform":
            if g <= self.lo:
                return 0.0
            if g >= self.hi:
                return 1.0
            return (g - self.lo) / (self.hi - self.lo)
        if self.kind == "exponential":
            return -math.expm1(-g / self.mean_param)
        arr = np.asarray(self.samples)
        return float(np.searchsorted(arr, g, side="right")) / len(arr)

    @property
    def mean(self) -> float:
        if self.kind == "uniform":
            return 0.5 * (self.lo + self.hi)
        if self.kind == "exponential":
            return self.mean_param
        return float(np.mean(self.samples))

    def sample(self, n: int, rng) -> np.ndarray:
        """Draw n costs (empirical distributions resample with replacement)."""
        if self.kind == "uniform":
            return rng.uniform(self.lo, self.hi, size=n)
        if self.kind == "exponential":
            return rng.exponential(self.mean_param, size=n)
        return rng.choice(np.asarray(self.samples), size=n, replace=True)


@dataclass(frozen=True)
class ThresholdGameSpec:
    n: int
    reward: float
    contact: ContactParams
    costs: CostDistribution

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("population must be >= 2")
        if not (math.isfinite(self.reward) and self.reward > 0):
            raise ValueError(f"reward must be finite and > 0, got {self.reward}")


@dataclass(frozen=True)
class ThresholdResult:
    """Equilibrium threshold plus a flag for degenerate participation."""

    g_th: float
    participation: float  # F(g_th)
    boundary: Optional[str] = None


def theta(spec: ThresholdGameSpec, g: float) -> float:
    """Expected activation value at private cost g when the threshold is g.

    Binomial expectation of r * P_first(K+1) - g*tau with K ~ B(N-1, F(g)).
    Strictly decreasing in g: a higher threshold both raises the direct cost
    and crowds the contest.
    """
    if g < 0:
        raise ValueError("energy cost must be >= 0")
    f = spec.costs.cdf(g)
    pmf = binom_pmf(spec.n - 1, f)
    p_first = np.array(
        [success_prob_first(spec.contact, k + 1) for k in range(spec.n)]
    )
    return spec.reward * float(pmf @ p_first) - g * spec.contact.tau


def solve_threshold(spec: ThresholdGameSpec, tol: float = 1e-12) -> ThresholdResult:
    """Unique zero of Theta on the widest bracket [0, r*P_first(1)/tau].

    Relays with g_i <= g_th strictly prefer activating, those above strictly
    prefer silence (verified pointwise by Theta's sign in tests).  When the
    distribution puts no mass below the bracket the root is the degenerate
    no-participation point, flagged rather than raised.
    """
    hi = spec.reward * success_prob_first(spec.contact, 1) / spec.contact.tau
    g_th = bisect_decreasing(lambda g: theta(spec, g), 0.0, hi, tol)
    part = spec.costs.cdf(g_th)
    boundary = "no_participation" if part == 0.0 else None
    return ThresholdResult(g_th=g_th, participation=part, boundary=boundary)


def reward_from_mean(contact: ContactParams, mu: float, psi: int) -> float:
    """Mean-based reward setting: r* = mu * tau / P_first(Psi)."""
    if psi < 1:
        raise ValueError("target active count must be >= 1")
    if not (math.isfinite(mu) and mu > 0):
        raise ValueError(f"mean cost must be finite and > 0, got {mu}")
    return mu * contact.tau / success_prob_first(contact, psi)


def expected_actives(spec: ThresholdGameSpec) -> float:
    """Mean active count N * F(g_th) at the threshold equilibrium."""
    return spec.n * solve_threshold(spec).participation
