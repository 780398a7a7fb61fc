"""Seeded Monte Carlo realization of single message rounds.

One round = one message lifetime tau.  Every active relay draws a two-hop
delivery time (sum of two exponential inter-meeting draws; times beyond tau
are censored to infinity) and the earliest delivery wins the reward of each
of the n_s independent source contests.  Every active relay pays its energy
cost for the round; silent relays receive the scenario's silent payoff.

Randomness comes from numpy's PCG64 ``Generator`` seeded explicitly, so the
same (spec, actions, seed) triple reproduces bit-identical outcomes.
Replication streams are derived from a master seed with the documented split
rule ``SeedSequence(master, spawn_key=(i,))`` for replication index i.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import game as _game
from .contact import ContactParams
from .game import FixedRegret, GameSpec
from .multiclass import MultiClassSpec
from .threshold import ThresholdGameSpec

__all__ = [
    "RoundOutcome",
    "RoundSpec",
    "sample_delivery_time",
    "play_round",
    "estimate_success_prob",
    "replication_rng",
    "realize_costs",
]

RoundSpec = Union[GameSpec, MultiClassSpec, ThresholdGameSpec]


def replication_rng(master_seed: int, index: int) -> np.random.Generator:
    """Independent generator for replication ``index`` of a master seed."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index,)))


@dataclass
class RoundOutcome:
    """Realized result of one round.

    delivery_times has one row per source contest and one column per relay;
    silent relays and censored (> tau) deliveries hold +inf.  winners holds
    the per-contest winning relay index, or None when nobody delivered in
    time.  Exactly the winner of each contest earns that contest's reward;
    every active relay pays cost*tau once per round.
    """

    actions: np.ndarray
    delivery_times: np.ndarray
    winners: tuple
    payoffs: np.ndarray

    @property
    def winner(self) -> Optional[int]:
        """Winning relay of the first contest (the only one when n_s = 1)."""
        return self.winners[0]

    @property
    def active_count(self) -> int:
        return int(self.actions.sum())


def sample_delivery_time(contact: ContactParams, rng: np.random.Generator) -> float:
    """One uncensored relay delivery time draw.

    Two-hop routing: source->relay plus relay->destination, i.e. the sum of
    two independent Exponential(lam) draws (Gamma(2, 1/lam)); one-hop: a
    single draw.  Censoring against tau is the caller's job.
    """
    if contact.routing == "one_hop":
        return float(rng.exponential(1.0 / contact.lam))
    return float(rng.gamma(2.0, 1.0 / contact.lam))


def _delivery_times(contact: ContactParams, size, rng) -> np.ndarray:
    if contact.routing == "one_hop":
        return rng.exponential(1.0 / contact.lam, size=size)
    return rng.gamma(2.0, 1.0 / contact.lam, size=size)


def realize_costs(spec: ThresholdGameSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw the private per-relay costs a threshold-game round needs."""
    return spec.costs.sample(spec.n, rng)


def _relay_table(spec: RoundSpec, costs) -> tuple:
    """(n, per-relay rewards, per-relay costs, class ids, silent payoff fn)."""
    if isinstance(spec, GameSpec):
        n = spec.n
        rewards = np.full(n, spec.r)
        cost_vec = np.full(n, spec.g)
        class_ids = np.zeros(n, dtype=int)
        silent = lambda k: _game.utility_silent(spec, k)
    elif isinstance(spec, MultiClassSpec):
        n = spec.n
        rewards = np.concatenate([np.full(c.count, c.r) for c in spec.classes])
        cost_vec = np.concatenate([np.full(c.count, c.g) for c in spec.classes])
        class_ids = np.concatenate(
            [np.full(c.count, j, dtype=int) for j, c in enumerate(spec.classes)]
        )
        silent = lambda k: 0.0
    elif isinstance(spec, ThresholdGameSpec):
        if costs is None:
            raise ValueError("threshold-game rounds need realized per-relay costs")
        n = spec.n
        rewards = np.full(n, spec.reward)
        cost_vec = np.asarray(costs, dtype=float)
        if cost_vec.shape != (n,):
            raise ValueError(f"expected {n} relay costs, got shape {cost_vec.shape}")
        class_ids = np.zeros(n, dtype=int)
        silent = lambda k: 0.0
    else:
        raise TypeError(f"unsupported spec type {type(spec).__name__}")
    return n, rewards, cost_vec, class_ids, silent


def play_round(
    spec: RoundSpec,
    actions,
    rng: np.random.Generator,
    costs=None,
) -> RoundOutcome:
    """Realize one round under the given action profile.

    Each of the n_s sources runs an independent first-delivery contest with
    fresh time draws; per-relay payoffs sum the contest rewards won and
    subtract cost*tau once for being active.  An active relay's expected
    payoff over the rng equals its scenario utility at the realized active
    count.
    """
    n, rewards, cost_vec, _, silent = _relay_table(spec, costs)
    contact = spec.contact
    acts = np.asarray(actions, dtype=bool)
    if acts.shape != (n,):
        raise ValueError(f"expected an action vector of length {n}")
    active_idx = np.flatnonzero(acts)
    k = len(active_idx)
    n_s = contact.num_sources

    times = np.full((n_s, n), np.inf)
    winners = []
    payoffs = np.zeros(n)
    if k > 0:
        draws = _delivery_times(contact, (n_s, k), rng)
        draws[draws > contact.tau] = np.inf
        times[:, active_idx] = draws
        for contest in range(n_s):
            row = draws[contest]
            best = row.min()
            if np.isinf(best):
                winners.append(None)
            else:
                w = int(active_idx[int(np.argmin(row))])  # argmin: lowest index on ties
                winners.append(w)
                payoffs[w] += rewards[w]
    else:
        winners = [None] * n_s
    payoffs[active_idx] -= cost_vec[active_idx] * contact.tau

    if not acts.all():
        silent_value = silent(k)
        payoffs[~acts] = silent_value
    return RoundOutcome(
        actions=acts,
        delivery_times=times,
        winners=tuple(winners),
        payoffs=payoffs,
    )


def estimate_success_prob(
    contact: ContactParams,
    k: int,
    reps: int,
    rng_or_seed: Union[int, np.random.Generator],
    chunk: int = 100_000,
) -> float:
    """Empirical frequency that a designated relay wins among k actives.

    Validation bridge to the closed form (1 - Q^k)/k: draw k delivery times
    per replication, censor at tau, and count how often relay 0 holds the
    minimum.  Replications are processed in chunks to bound memory.
    """
    if k < 1:
        raise ValueError("need at least one active relay")
    if reps < 1:
        raise ValueError("need at least one replication")
    rng = (
        rng_or_seed
        if isinstance(rng_or_seed, np.random.Generator)
        else np.random.default_rng(rng_or_seed)
    )
    wins = 0
    done = 0
    while done < reps:
        m = min(chunk, reps - done)
        times = _delivery_times(contact, (m, k), rng)
        mins = times.min(axis=1)
        wins += int(np.count_nonzero((times[:, 0] <= mins) & (mins <= contact.tau)))
        done += m
    return wins / reps
