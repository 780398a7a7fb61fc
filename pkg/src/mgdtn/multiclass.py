"""Device-dependent heterogeneity: per-class costs, rewards and equilibria.

Relays are partitioned into M classes; class j holds N_j relays with energy
cost g_j and class reward r_j.  An active class-j relay at k total actives
earns

    U_j(T, k) = n_s * r_j * (1 - Q^k)/k - g_j * tau,

silent relays earn 0.  Sources pick rewards through the break-even relation
n_s * r_j * P_first(Psi_j) = g_j * tau; larger rewards per unit cost pull a
class toward activity.

Two pure-equilibrium readings coexist and are both exposed:

* ``pure_targets``: per-class inversion of the break-even relation with the
  class's own count as the P_first argument (the published per-class rule);
* ``pure_ne_profiles``: per-class count vectors stable under the actual
  total-count utilities (what brute-force enumeration of the game verifies).

The fully mixed solver covers M = 2 exactly (nested bisection); an
experimental damped fixed-point iteration handles M > 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._numeric import binom_pmf, bisect_decreasing, bisect_sign
from .contact import ContactParams, success_prob_first
from .game import NoInteriorEquilibrium

__all__ = [
    "ClassSpec",
    "MultiClassSpec",
    "TwoClassMixedEq",
    "class_utility_active",
    "design_rewards",
    "implied_target",
    "pure_targets",
    "pure_ne_profiles",
    "indifference_pair",
    "fully_mixed_ne_2class",
    "fully_mixed_ne_multiclass",
]

_INNER_TOL = 1e-12
_OUTER_TOL = 1e-11


@dataclass(frozen=True)
class ClassSpec:
    count: int
    g: float
    r: float

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("class must contain at least one relay")
        if not (math.isfinite(self.g) and self.g > 0):
            raise ValueError(f"energy cost must be finite and > 0, got {self.g}")
        if not (math.isfinite(self.r) and self.r > 0):
            raise ValueError(f"reward must be finite and > 0, got {self.r}")


@dataclass(frozen=True)
class MultiClassSpec:
    classes: tuple
    contact: ContactParams

    def __post_init__(self):
        if len(self.classes) < 1:
            raise ValueError("need at least one class")
        object.__setattr__(self, "classes", tuple(self.classes))

    @property
    def n(self) -> int:
        return sum(c.count for c in self.classes)

    @property
    def num_classes(self) -> int:
        return len(self.classes)


@dataclass(frozen=True)
class TwoClassMixedEq:
    """Solution of the coupled two-class indifference system.

    ``clamped[j]`` is None when class j mixes interior, else "at_zero" /
    "at_one" when no interior probability can make that class indifferent
    and it saturates at a pure strategy (still a Nash equilibrium, just not
    a fully mixed one).
    """

    p: tuple
    clamped: tuple

    @property
    def fully_mixed(self) -> bool:
        return all(c is None for c in self.clamped)


def class_utility_active(spec: MultiClassSpec, class_idx: int, k: int) -> float:
    """U_j(T, k) for a class-j relay active among k total actives."""
    if not 0 <= class_idx < spec.num_classes:
        raise IndexError(f"class index {class_idx} out of range")
    if not 1 <= k <= spec.n:
        raise ValueError(f"active count must be in 1..{spec.n}, got {k}")
    cls = spec.classes[class_idx]
    ns = spec.contact.num_sources
    return ns * cls.r * success_prob_first(spec.contact, k) - cls.g * spec.contact.tau


def design_rewards(
    contact: ContactParams, costs: Sequence[float], targets: Sequence[int]
) -> list[float]:
    """Per-class rewards r_j* with n_s * r_j* * P_first(Psi_j) = g_j * tau."""
    if len(costs) != len(targets):
        raise ValueError("need one target per class")
    rewards = []
    for g, psi in zip(costs, targets):
        if psi < 1:
            raise ValueError("per-class target must be >= 1")
        rewards.append(
            g * contact.tau / (contact.num_sources * success_prob_first(contact, psi))
        )
    return rewards


def _break_even_count(contact: ContactParams, g: float, r: float, n_max: int) -> int:
    """Largest k <= n_max with n_s * r * P_first(k) >= g * tau (with slack)."""
    ns = contact.num_sources
    target = g * contact.tau
    tol = 1e-9 * target
    best = 0
    for k in range(1, n_max + 1):
        if ns * r * success_prob_first(contact, k) >= target - tol:
            best = k
        else:
            break
    return best


def implied_target(contact: ContactParams, g: float, r: float, n_max: int = 10_000) -> int:
    """Invert the break-even relation: the activation count a reward sustains."""
    return _break_even_count(contact, g, r, n_max)


def pure_targets(spec: MultiClassSpec) -> list[int]:
    """Per-class pure counts k_{T,j}: largest k with n_s r_j P_first(k) >= g_j tau.

    This is the published per-class rule, where each class's break-even is
    evaluated at its own count.  The counts are reward-implied targets and
    may exceed the class population (the asymmetric benchmark case yields
    28 for a 20-relay class); see ``pure_ne_profiles`` for the reading in
    which every class reacts to the network-wide active count.
    """
    return [
        _break_even_count(spec.contact, c.g, c.r, 10_000) for c in spec.classes
    ]


def pure_ne_profiles(spec: MultiClassSpec) -> list[tuple]:
    """Per-class count vectors stable under the total-count utilities.

    A vector (k_1, .., k_M) with k = sum k_j is an equilibrium iff every
    class with an active relay has U_j(T, k) >= 0 and every class with a
    silent relay has U_j(T, k+1) <= 0.  Enumerated directly; feasible for
    the moderate class counts this module targets.
    """
    tol = 1e-12 * max(1.0, spec.contact.num_sources * max(c.r for c in spec.classes))
    ranges = [range(c.count + 1) for c in spec.classes]
    stable = []

    def recurse(idx, chosen, total):
        if idx == spec.num_classes:
            for j, kj in enumerate(chosen):
                if kj >= 1 and class_utility_active(spec, j, total) < -tol:
                    return
                if kj < spec.classes[j].count and total < spec.n:
                    if class_utility_active(spec, j, total + 1) > tol:
                        return
            stable.append(tuple(chosen))
            return
        for kj in ranges[idx]:
            recurse(idx + 1, chosen + [kj], total + kj)

    recurse(0, [], 0)
    return [v for v in stable if sum(v) >= 1]


def _total_count_pmf(spec: MultiClassSpec, probs: Sequence[float], skip_one_of: int):
    """Pmf of the total active count among a tagged relay's opponents.

    Class ``skip_one_of`` contributes N_j - 1 trials (the tagged relay is
    excluded from its own class), every other class its full count.
    """
    pmf = np.ones(1)
    for j, cls in enumerate(spec.classes):
        trials = cls.count - 1 if j == skip_one_of else cls.count
        pmf = np.convolve(pmf, binom_pmf(trials, probs[j]))
    return pmf


def _indifference(spec: MultiClassSpec, class_idx: int, probs: Sequence[float]) -> float:
    """A_j: expected U_j(T, 1+K) for a class-j relay joining K active opponents."""
    pmf = _total_count_pmf(spec, probs, skip_one_of=class_idx)
    values = np.array(
        [class_utility_active(spec, class_idx, 1 + k) for k in range(len(pmf))]
    )
    return float(pmf @ values)


def indifference_pair(spec: MultiClassSpec, p1: float, p2: float) -> tuple:
    """(A_1, A_2) for a two-class spec; each strictly decreasing in p1 and p2."""
    if spec.num_classes != 2:
        raise ValueError("indifference_pair is defined for two-class specs")
    for p in (p1, p2):
        if not 0.0 <= p <= 1.0:
            raise ValueError("probabilities must lie in [0, 1]")
    return (
        _indifference(spec, 0, (p1, p2)),
        _indifference(spec, 1, (p1, p2)),
    )


def _inner_p2(spec: MultiClassSpec, p1: float) -> tuple:
    """Class-2 best mixing response to p1: the A_2(p1, .) root, clamped to [0,1]."""
    at_zero = _indifference(spec, 1, (p1, 0.0))
    if at_zero <= 0.0:
        return 0.0, "at_zero"
    at_one = _indifference(spec, 1, (p1, 1.0))
    if at_one >= 0.0:
        return 1.0, "at_one"
    root = bisect_decreasing(
        lambda q: _indifference(spec, 1, (p1, q)), 0.0, 1.0, _INNER_TOL
    )
    return root, None


def fully_mixed_ne_2class(spec: MultiClassSpec, scan_points: int = 129) -> TwoClassMixedEq:
    """Solve A_1(p1, p2) = A_2(p1, p2) = 0 by nested bisection.

    The inner solve eliminates p2 through class 2's indifference (clamped to
    [0, 1] where no interior response exists); the outer map
    phi(p1) = A_1(p1, p2_hat(p1)) is scanned on a grid and every sign-change
    bracket is bisected.  phi is strictly increasing wherever the inner
    response is interior (the classes correct each other) and strictly
    decreasing on the clamped pieces, so each equilibrium sits in its own
    bracket; when several coexist the fully mixed one (both probabilities
    interior) is returned, otherwise a boundary-flagged equilibrium where
    the clamped class strictly prefers its pure strategy.  Corner sign
    failures raise NoInteriorEquilibrium.
    """
    if spec.num_classes != 2:
        raise ValueError("fully_mixed_ne_2class is defined for two-class specs")
    a_00 = indifference_pair(spec, 0.0, 0.0)
    a_11 = indifference_pair(spec, 1.0, 1.0)
    for j in range(2):
        if not (a_00[j] > 0.0 > a_11[j]):
            raise NoInteriorEquilibrium(
                f"class {j + 1}: A(0,0)={a_00[j]:.6g}, A(1,1)={a_11[j]:.6g}"
            )

    def phi(p1: float) -> float:
        return _indifference(spec, 0, (p1, _inner_p2(spec, p1)[0]))

    grid = np.linspace(0.0, 1.0, scan_points)
    vals = [phi(p) for p in grid]

    candidates = []
    for i in range(scan_points - 1):
        if vals[i] == 0.0 or (vals[i] > 0) != (vals[i + 1] > 0):
            p1_star = bisect_sign(
                phi, float(grid[i]), float(grid[i + 1]), vals[i], vals[i + 1], _OUTER_TOL
            )
            p2_star, flag2 = _inner_p2(spec, p1_star)
            candidates.append(TwoClassMixedEq(p=(p1_star, p2_star), clamped=(None, flag2)))
    if vals[-1] == 0.0 and not candidates:
        p2_star, flag2 = _inner_p2(spec, 1.0)
        candidates.append(TwoClassMixedEq(p=(1.0, p2_star), clamped=(None, flag2)))

    for cand in candidates:
        if cand.fully_mixed:
            return cand
    if candidates:
        return candidates[0]

    # no crossing anywhere: class 1 saturates at whichever bound phi points to
    if vals[0] < 0.0:
        p2_star, flag2 = _inner_p2(spec, 0.0)
        return TwoClassMixedEq(p=(0.0, p2_star), clamped=("at_zero", flag2))
    p2_star, flag2 = _inner_p2(spec, 1.0)
    return TwoClassMixedEq(p=(1.0, p2_star), clamped=("at_one", flag2))


def fully_mixed_ne_multiclass(
    spec: MultiClassSpec,
    damping: float = 0.25,
    tol: float = 1e-10,
    max_iter: int = 50_000,
) -> Optional[list[float]]:
    """Experimental M-class solver by damped fixed-point iteration.

    Each class repeatedly moves its probability toward the clamped root of
    its own indifference map given the others, settling on a fixed point of
    the clamped best-response map: a Nash equilibrium, though not
    necessarily an interior one.  Interior points are best-response unstable
    here (the reaction-slope product N1/(N2-1) * N2/(N1-1) exceeds 1), so
    asymmetric instances typically land on a boundary equilibrium; use
    ``fully_mixed_ne_2class`` when the interior M = 2 solution is wanted.
    Returns None when the iteration fails to settle.
    """
    m = spec.num_classes
    probs = [0.5] * m

    def class_root(j: int, current: list[float]) -> float:
        if _indifference(spec, j, tuple(current[:j] + [0.0] + current[j + 1 :])) <= 0:
            return 0.0
        if _indifference(spec, j, tuple(current[:j] + [1.0] + current[j + 1 :])) >= 0:
            return 1.0
        return bisect_decreasing(
            lambda q: _indifference(spec, j, tuple(current[:j] + [q] + current[j + 1 :])),
            0.0,
            1.0,
            tol,
        )

    for _ in range(max_iter):
        new = list(probs)
        shift = 0.0
        for j in range(m):
            target = class_root(j, new)
            step = damping * (target - new[j])
            new[j] += step
            shift = max(shift, abs(step))
        probs = new
        if shift < tol:
            return probs
    return None
