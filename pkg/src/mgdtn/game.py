"""Homogeneous-cost minority game: utilities and every equilibrium class.

All N relays share the energy cost g and compete for a per-message reward r
paid to the first relay that delivers.  Active utility at k total actives is

    U(T, k) = n_s * r * (1 - Q^k)/k - g*tau,

strictly decreasing in k, which is what makes this a minority game.  Two
silent-side conventions are supported:

* zero-sum: a silent relay's value is the negation of the active value.  For
  expected-value computations the negation is taken at the count the silent
  relay would create by activating (so a mixing relay compares U(T, k+1)
  against -U(T, k+1) and the indifference condition collapses to the binomial
  zero-crossing A(N, p) = 0);
* fixed regret: silent relays receive the constant -alpha.

Solvers: pure equilibria (exact comfort level), the unique symmetric fully
mixed equilibrium, and the (l, s, p*) family with l sure-active and s
sure-silent relays alongside mixers.  The paper-facing coordinate names
(l, r) are renamed (l, s) to keep ``r`` for the reward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from ._numeric import binom_pmf, bisect_decreasing
from .contact import ContactParams, success_prob_first

__all__ = [
    "ZeroSum",
    "FixedRegret",
    "UtilityScenario",
    "GameSpec",
    "MixedProfile",
    "PureEquilibria",
    "PartialMixedEq",
    "NoInteriorEquilibrium",
    "utility_active",
    "utility_silent",
    "comfort_level",
    "pure_ne",
    "indifference_fn",
    "fully_mixed_ne",
    "v_t",
    "v_s",
    "partial_mixed_ne",
    "enumerate_partial_eqs",
    "predicted_partial_count",
]

P_TOL = 1e-12  # absolute tolerance on equilibrium probabilities


@dataclass(frozen=True)
class ZeroSum:
    """Silent value is the negation of the active value."""

    alpha: float = 0.0  # unused; kept so both scenarios expose .alpha


@dataclass(frozen=True)
class FixedRegret:
    """Silent relays receive the constant -alpha regardless of the others."""

    alpha: float = 0.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("regret must be >= 0")


UtilityScenario = Union[ZeroSum, FixedRegret]


@dataclass(frozen=True)
class GameSpec:
    """One homogeneous game instance."""

    n: int
    g: float
    r: float
    contact: ContactParams
    scenario: UtilityScenario = field(default_factory=ZeroSum)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("population must be >= 2")
        if not (math.isfinite(self.g) and self.g > 0):
            raise ValueError(f"energy cost must be finite and > 0, got {self.g}")
        if not (math.isfinite(self.r) and self.r > 0):
            raise ValueError(f"reward must be finite and > 0, got {self.r}")

    @property
    def utility_tol(self) -> float:
        """Absolute slack for utility sign tests at designed-reward boundaries."""
        return 1e-12 * max(1.0, self.contact.num_sources * self.r)


@dataclass(frozen=True)
class MixedProfile:
    """A length-N vector of activation probabilities."""

    probs: tuple

    def __post_init__(self):
        if any(not (0.0 <= p <= 1.0) for p in self.probs):
            raise ValueError("activation probabilities must lie in [0, 1]")

    @property
    def fully_mixed(self) -> bool:
        return all(0.0 < p < 1.0 for p in self.probs)

    @classmethod
    def symmetric(cls, n: int, p: float) -> "MixedProfile":
        return cls(probs=(p,) * n)


@dataclass(frozen=True)
class PureEquilibria:
    """Pure-equilibrium active counts, with a flag for boundary cases.

    ``counts`` holds active counts; any assignment of that many relays to T
    is an equilibrium (C(N, k) profiles per count).  ``boundary`` is None for
    an interior crossing, else "all_silent" / "all_active".
    """

    counts: tuple
    boundary: Optional[str] = None


@dataclass(frozen=True)
class PartialMixedEq:
    """Equilibrium with ``num_pure_t`` sure-active, ``num_pure_s`` sure-silent
    relays and all remaining relays mixing at ``p_star``."""

    num_pure_t: int
    num_pure_s: int
    p_star: float

    def __post_init__(self):
        if self.num_pure_t < 0 or self.num_pure_s < 0:
            raise ValueError("pure-strategy counts must be >= 0")
        if not 0.0 < self.p_star < 1.0:
            raise ValueError("mixer probability must be interior")


class NoInteriorEquilibrium(ValueError):
    """Raised when the sign conditions for an interior mixed root fail."""


def utility_active(spec: GameSpec, k: int) -> float:
    """Expected utility of an active relay when k relays are active in total."""
    if not 1 <= k <= spec.n:
        raise ValueError(f"active count must be in 1..{spec.n}, got {k}")
    ns = spec.contact.num_sources
    return ns * spec.r * success_prob_first(spec.contact, k) - spec.g * spec.contact.tau


def utility_silent(spec: GameSpec, k_t: int) -> float:
    """Silent-side utility evaluated at active count ``k_t``.

    Zero-sum: -utility_active(k_t), and 0 at k_t = 0 (there is no active
    counterpart to negate).  Fixed regret: the constant -alpha.
    """
    if not 0 <= k_t <= spec.n:
        raise ValueError(f"active count must be in 0..{spec.n}, got {k_t}")
    if isinstance(spec.scenario, FixedRegret):
        return -spec.scenario.alpha
    if k_t == 0:
        return 0.0
    return -utility_active(spec, k_t)


def _regret_offset(spec: GameSpec) -> float:
    """alpha for fixed-regret specs, 0 for zero-sum ones."""
    return spec.scenario.alpha if isinstance(spec.scenario, FixedRegret) else 0.0


def comfort_level(spec: GameSpec) -> int:
    """Largest k with U(T,k) >= 0 (0 if even a lone relay loses money)."""
    tol = spec.utility_tol
    psi = 0
    for k in range(1, spec.n + 1):
        if utility_active(spec, k) >= -tol:
            psi = k
        else:
            break
    return psi


def pure_ne(spec: GameSpec) -> PureEquilibria:
    """Pure-equilibrium active counts.

    Zero-sum: the unique count is the comfort level Psi (largest k with
    U(T,k) >= 0); {0} or {N} with a boundary flag when the sign never flips.
    Fixed regret: the largest k with U(T,k) >= -alpha; the count below it is
    also an equilibrium exactly when U(T,k) = -alpha, i.e. when a silent
    relay is indifferent rather than strictly deterred.
    """
    tol = spec.utility_tol
    alpha = _regret_offset(spec)
    k_star = 0
    for k in range(1, spec.n + 1):
        if utility_active(spec, k) + alpha >= -tol:
            k_star = k
        else:
            break
    if k_star == 0:
        return PureEquilibria(counts=(0,), boundary="all_silent")
    if k_star == spec.n:
        return PureEquilibria(counts=(spec.n,), boundary="all_active")
    if isinstance(spec.scenario, FixedRegret):
        if abs(utility_active(spec, k_star) + alpha) <= tol and k_star >= 1:
            return PureEquilibria(counts=(k_star - 1, k_star))
        return PureEquilibria(counts=(k_star,))
    return PureEquilibria(counts=(k_star,))


def _expect_over_actives(spec: GameSpec, base: int, trials: int, p: float) -> float:
    """E[U(T, base + K)] with K ~ Binomial(trials, p); U(T, 0) counts as 0."""
    pmf = binom_pmf(trials, p)
    values = np.array(
        [0.0 if base + k == 0 else utility_active(spec, base + k) for k in range(trials + 1)]
    )
    return float(pmf @ values)


def indifference_fn(spec: GameSpec, p: float) -> float:
    """A(N, p): a mixer's expected active-side value against N-1 opponents at p.

    Exact binomial expectation of U(T, 1+K), K ~ Binomial(N-1, p), plus alpha
    in the fixed-regret scenario.  Strictly decreasing in p; its unique zero
    is the symmetric fully mixed equilibrium.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return _expect_over_actives(spec, 1, spec.n - 1, p) + _regret_offset(spec)


def fully_mixed_ne(spec: GameSpec, tol: float = P_TOL) -> float:
    """The unique symmetric interior equilibrium probability p*.

    Requires an interior crossing: U(T,1)+alpha > 0 > U(T,N)+alpha.
    """
    lo_val = indifference_fn(spec, 0.0)
    hi_val = indifference_fn(spec, 1.0)
    if not (lo_val > 0.0 > hi_val):
        raise NoInteriorEquilibrium(
            f"no interior equilibrium: A(N,0)={lo_val:.6g}, A(N,1)={hi_val:.6g}"
        )
    return bisect_decreasing(lambda p: indifference_fn(spec, p), 0.0, 1.0, tol)


def v_t(spec: GameSpec, l: int, s: int, p: float) -> float:
    """Expected payoff of a sure-active relay in profile (l, s, p).

    l relays (the tagged one included) play T surely, s play S surely and the
    other N-l-s mix at p: E[U(T, l+K)], K ~ Binomial(N-l-s, p).  The l = 0
    boundary only arises inside silent-side values, where the no-active term
    contributes 0.
    """
    if l < 0 or s < 0 or l + s > spec.n:
        raise ValueError("need l, s >= 0 and l + s <= N")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return _expect_over_actives(spec, l, spec.n - l - s, p)


def v_s(spec: GameSpec, l: int, s: int, p: float) -> float:
    """Silent-side value function paired with v_t.

    Zero-sum: the definitional negation -v_t(l, s, p).  Fixed regret: -alpha.
    """
    if isinstance(spec.scenario, FixedRegret):
        return -spec.scenario.alpha
    return -v_t(spec, l, s, p)


def _mixer_gap(spec: GameSpec, l: int, s: int, p: float) -> float:
    """Gap between a mixer's T-side and S-side values at profile (l, s, p).

    The deviating mixer joins the l sure-active relays either way it is
    evaluated, so both sides average over the same Binomial(N-l-s-1, p)
    draw of the remaining mixers: the condition v_t(l+1, s, p) = v_s(l+1, s, p)
    (zero-sum) or = -alpha (fixed regret).
    """
    t_side = v_t(spec, l + 1, s, p)
    if isinstance(spec.scenario, FixedRegret):
        return t_side + spec.scenario.alpha
    return t_side - v_s(spec, l + 1, s, p)


def partial_mixed_ne(spec: GameSpec, l: int, s: int, tol: float = P_TOL) -> Optional[float]:
    """Mixer probability of the (l, s, p*) equilibrium, or None if none exists.

    Existence needs the indifference gap to change sign on (0, 1), which for
    zero-sum utilities amounts to l < Psi together with U(T, N-s) < 0.
    Absence is a value, not an error.
    """
    if l < 0 or s < 0:
        raise ValueError("need l, s >= 0")
    if l + s > spec.n - 2:
        return None  # fewer than two mixers: no interior indifference point
    gap_at_0 = _mixer_gap(spec, l, s, 0.0)
    gap_at_1 = _mixer_gap(spec, l, s, 1.0)
    if not (gap_at_0 > 0.0 >= gap_at_1):
        return None
    root = bisect_decreasing(lambda p: _mixer_gap(spec, l, s, p), 0.0, 1.0, tol)
    if not 0.0 < root < 1.0:
        return None
    return root


def enumerate_partial_eqs(spec: GameSpec) -> list[PartialMixedEq]:
    """All (l, s, p*) equilibria found by sweeping l < Psi, l + s <= N - 2.

    Zero-sum scenario only.  The returned count is compared against the
    published closed-form count in tests; disagreement at boundary (l, s)
    pairs is recorded there, not reconciled here.
    """
    if isinstance(spec.scenario, FixedRegret):
        raise ValueError("partial-equilibrium sweep is defined for the zero-sum scenario")
    found = []
    psi = comfort_level(spec)
    for l in range(psi):
        for s in range(spec.n - 1 - l):
            p_star = partial_mixed_ne(spec, l, s)
            if p_star is not None:
                found.append(PartialMixedEq(num_pure_t=l, num_pure_s=s, p_star=p_star))
    return found


def predicted_partial_count(spec: GameSpec) -> int:
    """The published count Psi*(N-2) - Psi*(Psi-1)/2 of (l, s, p*) equilibria."""
    psi = comfort_level(spec)
    return psi * (spec.n - 2) - psi * (psi - 1) // 2
