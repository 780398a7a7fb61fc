"""Closed-form delivery probabilities for the two-hop relay process.

Inter-meeting times between any node pair are i.i.d. exponential with rate
``lam``.  A message copy handed to a relay at time 0 reaches the destination
through one relay-destination contact (one-hop mode) or through the
source-relay plus relay-destination pair of contacts (two-hop mode, the
default).  Copies are dropped after the lifetime ``tau``, so a single relay
fails with probability Q = (1 + lam*tau) * exp(-lam*tau) in two-hop mode and
exp(-lam*tau) in one-hop mode.

Only the first relay to deliver earns the per-message reward, which makes an
active relay's win probability (1 - Q^k) / k when k relays are active.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import NamedTuple

__all__ = [
    "ContactParams",
    "DeliveryTarget",
    "TargetActives",
    "failure_prob",
    "log_failure_prob",
    "failure_prob_power",
    "delivery_prob",
    "success_prob_first",
    "target_actives",
    "reward_for_target",
]

# slack for integer boundaries hit exactly by designed rewards/targets
_CEIL_SLACK = 1e-9


@dataclass(frozen=True)
class ContactParams:
    """Mobility and rewarding environment of one DTN instance.

    lam:          pairwise meeting rate (1 / time unit)
    tau:          message lifetime (time units)
    num_sources:  number of source-destination pairs, each running an
                  independent first-to-deliver contest with the same reward
    routing:      "two_hop" (source->relay->destination) or "one_hop"
    """

    lam: float
    tau: float
    num_sources: int = 1
    routing: str = "two_hop"

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise ValueError(f"meeting rate must be finite and > 0, got {self.lam}")
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ValueError(f"message lifetime must be finite and > 0, got {self.tau}")
        if self.num_sources < 1:
            raise ValueError(f"need at least one source, got {self.num_sources}")
        if self.routing not in ("two_hop", "one_hop"):
            raise ValueError(f"unknown routing mode {self.routing!r}")


@dataclass(frozen=True)
class DeliveryTarget:
    """A delivery-probability requirement and the relay count meeting it."""

    d_succ_threshold: float
    psi: int

    def __post_init__(self):
        if not 0.0 < self.d_succ_threshold < 1.0:
            raise ValueError("delivery threshold must lie in (0, 1)")
        if self.psi < 1:
            raise ValueError("active-relay target must be >= 1")

    @classmethod
    def from_threshold(cls, params: ContactParams, d_th: float) -> "DeliveryTarget":
        return cls(d_th, target_actives(params, d_th).direct)


class TargetActives(NamedTuple):
    """Both published inversions of the delivery target; ``direct`` is the default."""

    direct: int
    remark: int


def failure_prob(params: ContactParams) -> float:
    """Probability Q that a single relay fails to deliver within ``tau``."""
    lt = params.lam * params.tau
    if params.routing == "one_hop":
        return math.exp(-lt)
    return (1.0 + lt) * math.exp(-lt)


def log_failure_prob(params: ContactParams) -> float:
    """ln Q, kept separate so Q^k can be formed without underflow for large k."""
    lt = params.lam * params.tau
    if params.routing == "one_hop":
        return -lt
    return math.log1p(lt) - lt


def failure_prob_power(params: ContactParams, k: int) -> float:
    """Q^k evaluated in log space; exact 1.0 at k = 0."""
    if k < 0:
        raise ValueError("relay count must be >= 0")
    if k == 0:
        return 1.0
    return math.exp(k * log_failure_prob(params))


def delivery_prob(params: ContactParams, k: int) -> float:
    """Source-side success probability 1 - Q^k with k active relays."""
    if k < 0:
        raise ValueError("relay count must be >= 0")
    if k == 0:
        return 0.0
    return -math.expm1(k * log_failure_prob(params))


def success_prob_first(params: ContactParams, k: int) -> float:
    """Probability (1 - Q^k)/k that a given active relay delivers first.

    Strictly decreasing in k: more competitors always shrink the win chance.
    """
    if k < 1:
        raise ValueError("win probability needs at least one active relay")
    return delivery_prob(params, k) / k


def target_actives(params: ContactParams, d_th: float) -> TargetActives:
    """Relay counts required to push 1 - Q^k to at least ``d_th``.

    ``direct`` inverts 1 - Q^k >= d_th (rounded up; extra relays only help).
    ``remark`` is the alternative published rule: the smallest k with
    k(k+1) >= 2*log(1-d_th)/log(Q).  The two do not coincide in general;
    callers should use ``direct`` unless they specifically want the other.
    """
    if not 0.0 < d_th < 1.0:
        raise ValueError("delivery threshold must lie in (0, 1)")
    log_q = log_failure_prob(params)
    ratio = math.log1p(-d_th) / log_q  # both logs negative
    # near-saturated thresholds carry only ~ulp(1)/(1-d) relative precision,
    # so integer ratios reached through a rounded probability are snapped
    slack = max(_CEIL_SLACK, 2.0 * sys.float_info.epsilon / ((1.0 - d_th) * -log_q))
    nearest = round(ratio)
    if nearest >= 1 and abs(ratio - nearest) <= slack:
        direct = int(nearest)
    else:
        direct = max(1, math.ceil(ratio - _CEIL_SLACK))
    rhs = 2.0 * ratio
    k = 1
    while k * (k + 1) < rhs - _CEIL_SLACK:
        k += 1
    return TargetActives(direct=direct, remark=k)


def reward_for_target(params: ContactParams, g: float, psi: int) -> float:
    """Reward making ``psi`` active relays the break-even point.

    Solves n_s * r * P_first(psi) = g * tau, i.e. an active relay's expected
    reward at the target population exactly covers its energy cost.
    """
    if psi < 1:
        raise ValueError("target active count must be >= 1")
    if not (math.isfinite(g) and g > 0):
        raise ValueError(f"energy cost must be finite and > 0, got {g}")
    return g * params.tau / (params.num_sources * success_prob_first(params, psi))
