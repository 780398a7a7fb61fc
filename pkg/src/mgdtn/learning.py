"""Distributed reinforcement learning of the activation game.

Each relay keeps a two-entry perception vector x_i = (x_iT, x_iS), its
running payoff estimates for activating and staying silent.  Rounds repeat:

1. map perceptions to an activation probability with the logit rule
   sigma_T = e^{beta x_T} / (e^{beta x_T} + e^{beta x_S});
2. sample an action, observe a payoff for it (a realized round outcome, or
   the exact expected payoff in exact mode);
3. blend the observation into the chosen entry, x += gamma * (payoff - x),
   leaving the other entry untouched.

With averaging steps the process tracks the fixed point of the perception->
expected-payoff map G; G is a maximum-norm contraction with modulus
beta * n_s * r whenever beta < 1/(n_s r), which also certifies the logit
profile as an eps-approximate equilibrium with
eps = (1/beta) * (entropy(sigma) + 1).  The hard-max limit beta = inf is
supported for experiments but carries no convergence guarantee.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union

import numpy as np

from .game import FixedRegret, GameSpec, ZeroSum
from .multiclass import MultiClassSpec
from .roundsim import RoundSpec, play_round, realize_costs
from .threshold import ThresholdGameSpec

__all__ = [
    "PerceptionState",
    "LearnerConfig",
    "Trajectory",
    "LearningResult",
    "EpsilonBound",
    "logit_policy",
    "update_perception",
    "expected_payoff_map",
    "run_learning",
    "contraction_margin",
    "epsilon_bound",
    "fixed_point_residual",
]


@dataclass
class PerceptionState:
    """Per-relay (x_T, x_S) payoff perceptions, row i for relay i."""

    x: np.ndarray

    @classmethod
    def zeros(cls, n: int) -> "PerceptionState":
        return cls(x=np.zeros((n, 2)))

    def copy(self) -> "PerceptionState":
        return PerceptionState(x=self.x.copy())


@dataclass(frozen=True)
class LearnerConfig:
    """Knobs of the learning loop.

    beta:           logit temperature; math.inf selects the hard-max rule.
    step_rule:      "reciprocal" (1/k) or "reciprocal_log" (1/(1 + k log k)).
    step_scope:     "per_action" indexes k by how often the entry itself was
                    updated (each perception is then the running mean of its
                    own observations); "round" uses the literal global round
                    counter even for entries that skipped rounds.
    eps_stop:       stop once the largest per-round perception change falls
                    to this level.
    payoff_mode:    "simulated" feeds realized round payoffs, "exact" feeds
                    the exact expected payoff of the sampled action.
    init_activation: activation probability of the very first round, before
                    any perception exists.
    anneal_rounds:  if > 0, ramp the temperature geometrically from
                    beta_start over this many rounds, up to beta itself when
                    beta is finite or up to beta_cap followed by the literal
                    hard-max rule when beta is infinite.
    snapshot_stride: record a perception snapshot every this many rounds
                    (0 = final state only).
    """

    beta: float = math.inf
    step_rule: str = "reciprocal"
    step_scope: str = "per_action"
    eps_stop: float = 1e-9
    max_rounds: int = 10_000
    payoff_mode: str = "simulated"
    init_activation: float = 0.5
    anneal_rounds: int = 0
    beta_start: float = 0.1
    beta_cap: float = 1e6
    snapshot_stride: int = 0

    def __post_init__(self):
        if not (self.beta > 0):
            raise ValueError("temperature must be > 0")
        if self.step_rule not in ("reciprocal", "reciprocal_log"):
            raise ValueError(f"unknown step rule {self.step_rule!r}")
        if self.step_scope not in ("per_action", "round"):
            raise ValueError(f"unknown step scope {self.step_scope!r}")
        if self.eps_stop <= 0:
            raise ValueError("eps_stop must be > 0")
        if self.max_rounds < 1:
            raise ValueError("need at least one round")
        if self.payoff_mode not in ("simulated", "exact"):
            raise ValueError(f"unknown payoff mode {self.payoff_mode!r}")
        if not 0.0 <= self.init_activation <= 1.0:
            raise ValueError("initial activation must lie in [0, 1]")
        if self.anneal_rounds > 0 and not (self.beta_start > 0 and self.beta_cap > self.beta_start):
            raise ValueError("annealing needs 0 < beta_start < beta_cap")


class EpsilonBound(NamedTuple):
    """Approximation guarantee; ``applicable`` is False in the hard-max limit."""

    value: float
    applicable: bool


@dataclass
class Trajectory:
    """Round-by-round record of one learning run."""

    sigma: np.ndarray  # (rounds, N) activation probabilities used each round
    actions: np.ndarray  # (rounds, N) sampled actions, True = active
    payoffs: np.ndarray  # (rounds, N) payoff fed to each relay's update
    class_ids: np.ndarray  # (N,) class of each relay
    snapshots: list = field(default_factory=list)  # [(round, x.copy())]

    @property
    def rounds(self) -> int:
        return self.sigma.shape[0]

    @property
    def active_counts(self) -> np.ndarray:
        return self.actions.sum(axis=1)

    def _tail(self, frac: float) -> slice:
        start = self.rounds - max(1, int(round(self.rounds * frac)))
        return slice(start, self.rounds)

    def tail_mean_sigma(self, frac: float = 0.2, class_id: Optional[int] = None) -> float:
        """Mean activation probability over the trailing ``frac`` of rounds."""
        window = self.sigma[self._tail(frac)]
        if class_id is not None:
            window = window[:, self.class_ids == class_id]
        return float(window.mean())

    def tail_mean_active(self, frac: float = 0.2) -> float:
        return float(self.active_counts[self._tail(frac)].mean())

    def to_csv(self, path, stride: int = 1) -> None:
        """Write ``round,relay,class,sigma_T,action,payoff,x_T,x_S`` rows.

        Rows are kept every ``stride`` rounds; the perception columns are
        filled only where a snapshot was recorded, to bound file size.
        """
        snap = {r: x for r, x in self.snapshots}
        rounds_out = sorted(set(range(1, self.rounds + 1, stride)) | set(snap))
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["round", "relay", "class", "sigma_T", "action", "payoff", "x_T", "x_S"]
            )
            for rnd in rounds_out:
                t = rnd - 1
                x = snap.get(rnd)
                for i in range(self.sigma.shape[1]):
                    x_t = f"{x[i, 0]!r}" if x is not None else ""
                    x_s = f"{x[i, 1]!r}" if x is not None else ""
                    writer.writerow(
                        [
                            rnd,
                            i,
                            int(self.class_ids[i]),
                            f"{self.sigma[t, i]!r}",
                            int(self.actions[t, i]),
                            f"{self.payoffs[t, i]!r}",
                            x_t,
                            x_s,
                        ]
                    )


@dataclass
class LearningResult:
    trajectory: Trajectory
    state: PerceptionState
    converged: bool
    rounds: int


def logit_policy(x, beta: float):
    """Activation probability sigma_T of the logit rule.

    Accepts one (x_T, x_S) pair or an (N, 2) array.  Computed through the
    difference x_T - x_S, which is the max-subtraction form, so large
    perceptions cannot overflow.  beta -> 0 gives 1/2; beta = inf gives the
    indicator of the larger perception with ties at 1/2.
    """
    arr = np.asarray(x, dtype=float)
    pair = arr.ndim == 1
    if pair:
        arr = arr[None, :]
    d = arr[:, 0] - arr[:, 1]
    if math.isinf(beta):
        out = np.where(d > 0, 1.0, np.where(d < 0, 0.0, 0.5))
    else:
        out = np.empty_like(d)
        pos = d >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-beta * d[pos]))
        ed = np.exp(beta * d[~pos])
        out[~pos] = ed / (1.0 + ed)
    return float(out[0]) if pair else out


def update_perception(x, action: str, payoff: float, gamma: float, form: str = "increment"):
    """One perception update; only the chosen action's entry moves.

    ``form`` picks between the two algebraically identical writings
    x <- (1-gamma) x + gamma u ("blend") and x <- x + gamma (u - x)
    ("increment").
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError("averaging factor must lie in (0, 1]")
    if action not in ("T", "S"):
        raise ValueError("action must be 'T' or 'S'")
    x_t, x_s = float(x[0]), float(x[1])
    idx = 0 if action == "T" else 1
    current = x_t if idx == 0 else x_s
    if form == "blend":
        new = (1.0 - gamma) * current + gamma * payoff
    elif form == "increment":
        new = current + gamma * (payoff - current)
    else:
        raise ValueError(f"unknown update form {form!r}")
    return (new, x_s) if idx == 0 else (x_t, new)


def _utility_tables(spec: Union[GameSpec, MultiClassSpec]):
    """(class_ids, per-class arrays of U_j(T, 1+K) for K = 0..N-1, silent info)."""
    if isinstance(spec, GameSpec):
        from .game import utility_active

        n = spec.n
        class_ids = np.zeros(n, dtype=int)
        u1 = [np.array([utility_active(spec, 1 + k) for k in range(n)])]
        if isinstance(spec.scenario, FixedRegret):
            silent = ("const", -spec.scenario.alpha)
        else:
            silent = ("negate", 0.0)
        return class_ids, u1, silent
    if isinstance(spec, MultiClassSpec):
        from .multiclass import class_utility_active

        n = spec.n
        class_ids = np.concatenate(
            [np.full(c.count, j, dtype=int) for j, c in enumerate(spec.classes)]
        )
        u1 = [
            np.array([class_utility_active(spec, j, 1 + k) for k in range(n)])
            for j in range(spec.num_classes)
        ]
        return class_ids, u1, ("const", 0.0)
    raise TypeError(
        "exact payoff maps are defined for homogeneous and multi-class specs"
    )


def _leave_one_out_pmfs(sigmas: np.ndarray) -> list:
    """Poisson-binomial pmfs of the opponents' active counts, one per relay.

    Exact dynamic-programming convolution of the heterogeneous Bernoulli
    trials; prefix/suffix products make the whole batch O(N^3) instead of
    recomputing each leave-one-out from scratch.
    """
    n = len(sigmas)
    prefix = [np.ones(1)]
    for p in sigmas[:-1]:
        prev = prefix[-1]
        nxt = np.zeros(len(prev) + 1)
        nxt[: len(prev)] = prev * (1.0 - p)
        nxt[1:] += prev * p
        prefix.append(nxt)
    suffix = [np.ones(1)]
    for p in sigmas[:0:-1]:
        prev = suffix[-1]
        nxt = np.zeros(len(prev) + 1)
        nxt[: len(prev)] = prev * (1.0 - p)
        nxt[1:] += prev * p
        suffix.append(nxt)
    suffix.reverse()
    return [np.convolve(prefix[i], suffix[i]) for i in range(n)]


def _payoff_map(class_ids, u1_tables, silent, sigmas: np.ndarray) -> np.ndarray:
    n = len(sigmas)
    out = np.empty((n, 2))
    pmfs = _leave_one_out_pmfs(sigmas)
    for i in range(n):
        g_t = float(pmfs[i] @ u1_tables[class_ids[i]])
        out[i, 0] = g_t
        out[i, 1] = -g_t if silent[0] == "negate" else silent[1]
    return out


def expected_payoff_map(
    spec: Union[GameSpec, MultiClassSpec], perceptions: np.ndarray, beta: float
) -> np.ndarray:
    """G(x): per-relay expected payoff of each action given everyone's logit.

    G_iT = E[U_i(T, 1+K)] with K the Poisson-binomial count of active
    opponents (opponent j active with probability sigma_jT(x_j)); the silent
    column follows the scenario (zero-sum negation, constant regret, or 0
    for multi-class).  Exact convolution, no sampling.
    """
    x = np.asarray(perceptions, dtype=float)
    class_ids, u1, silent = _utility_tables(spec)
    sigmas = logit_policy(x, beta)
    return _payoff_map(class_ids, u1, silent, np.asarray(sigmas))


def contraction_margin(spec: RoundSpec, beta: float) -> float:
    """1/(n_s * r) - beta; positive means the contraction condition holds.

    Multi-class specs use the largest class reward as the scale.
    """
    if isinstance(spec, GameSpec):
        r = spec.r
    elif isinstance(spec, MultiClassSpec):
        r = max(c.r for c in spec.classes)
    elif isinstance(spec, ThresholdGameSpec):
        r = spec.reward
    else:
        raise TypeError(f"unsupported spec type {type(spec).__name__}")
    return 1.0 / (spec.contact.num_sources * r) - beta


def epsilon_bound(state: Union[PerceptionState, np.ndarray], beta: float) -> EpsilonBound:
    """eps of the eps-approximate equilibrium certificate at a converged state.

    eps = max_i (1/beta) * (H(sigma_i) + 1) with H the two-point entropy of
    relay i's logit policy; at most (ln 2 + 1)/beta.  The bound assumes a
    finite temperature, so the hard-max limit reports 0 flagged inapplicable.
    """
    x = state.x if isinstance(state, PerceptionState) else np.asarray(state, dtype=float)
    if math.isinf(beta):
        return EpsilonBound(value=0.0, applicable=False)
    sig = np.asarray(logit_policy(x, beta))
    sig = np.clip(sig, 1e-300, 1.0 - 1e-16)
    entropy = -(sig * np.log(sig) + (1.0 - sig) * np.log1p(-sig))
    return EpsilonBound(value=float((entropy + 1.0).max() / beta), applicable=True)


def fixed_point_residual(
    spec: Union[GameSpec, MultiClassSpec], perceptions, beta: float
) -> float:
    """Max-norm distance ||G(x) - x||_inf from the payoff-map fixed point."""
    x = np.asarray(perceptions, dtype=float)
    return float(np.abs(expected_payoff_map(spec, x, beta) - x).max())


def _gamma(config: LearnerConfig, k: int) -> float:
    if config.step_rule == "reciprocal":
        return 1.0 / k
    return 1.0 / (1.0 + k * math.log(k)) if k > 1 else 1.0


def _spec_size(spec: RoundSpec) -> int:
    return spec.n


def run_learning(
    spec: RoundSpec,
    config: LearnerConfig,
    seed: int,
    update_form: str = "increment",
) -> LearningResult:
    """Run the learning loop until the perception changes settle.

    Round k: actions are sampled from the logit policies (round 1 from
    ``init_activation``), payoffs come from a simulated round or from the
    exact payoff map at the sampled action, and only the sampled entries are
    re-averaged.  Stops when the largest per-relay perception change drops
    to ``eps_stop``; hitting ``max_rounds`` first flags the result
    unconverged instead of raising.  Deterministic for a fixed seed.
    """
    n = _spec_size(spec)
    rng = np.random.default_rng(seed)
    exact = config.payoff_mode == "exact"
    costs = None
    if isinstance(spec, ThresholdGameSpec):
        if exact:
            raise ValueError("exact payoff mode needs a homogeneous or multi-class spec")
        costs = realize_costs(spec, rng)
    if exact:
        class_ids, u1_tables, silent = _utility_tables(spec)
    else:
        class_ids, u1_tables, silent = None, None, None
        if isinstance(spec, MultiClassSpec):
            class_ids = np.concatenate(
                [np.full(c.count, j, dtype=int) for j, c in enumerate(spec.classes)]
            )
        else:
            class_ids = np.zeros(n, dtype=int)

    x = np.zeros((n, 2))
    update_counts = np.zeros((n, 2), dtype=np.int64)
    sig_hist = np.empty((config.max_rounds, n), dtype=np.float32)
    act_hist = np.empty((config.max_rounds, n), dtype=bool)
    pay_hist = np.empty((config.max_rounds, n), dtype=np.float32)
    snapshots = []
    rows = np.arange(n)

    converged = False
    rounds_run = 0
    for k in range(1, config.max_rounds + 1):
        if config.anneal_rounds > 0:
            peak = config.beta if math.isfinite(config.beta) else config.beta_cap
            if k >= config.anneal_rounds:
                beta_k = config.beta
            else:
                beta_k = config.beta_start * (peak / config.beta_start) ** (k / config.anneal_rounds)
        else:
            beta_k = config.beta
        sigma = np.asarray(logit_policy(x, beta_k))
        if k == 1:
            actions = rng.random(n) < config.init_activation
        else:
            actions = rng.random(n) < sigma

        if exact:
            g = _payoff_map(class_ids, u1_tables, silent, sigma)
            payoffs = g[rows, np.where(actions, 0, 1)]
        else:
            payoffs = play_round(spec, actions, rng, costs=costs).payoffs

        cols = np.where(actions, 0, 1)
        if config.step_scope == "per_action":
            update_counts[rows, cols] += 1
            if config.step_rule == "reciprocal":
                gammas = 1.0 / update_counts[rows, cols]
            else:
                t = update_counts[rows, cols].astype(float)
                gammas = np.where(t > 1, 1.0 / (1.0 + t * np.log(t)), 1.0)
        else:
            gammas = np.full(n, _gamma(config, k))

        old = x[rows, cols]
        if update_form == "blend":
            new = (1.0 - gammas) * old + gammas * payoffs
        else:
            new = old + gammas * (payoffs - old)
        x[rows, cols] = new
        max_change = float(np.abs(new - old).max())

        sig_hist[k - 1] = sigma
        act_hist[k - 1] = actions
        pay_hist[k - 1] = payoffs
        if config.snapshot_stride and k % config.snapshot_stride == 0:
            snapshots.append((k, x.copy()))
        rounds_run = k
        if max_change <= config.eps_stop:
            converged = True
            break

    snapshots.append((rounds_run, x.copy()))
    trajectory = Trajectory(
        sigma=sig_hist[:rounds_run],
        actions=act_hist[:rounds_run],
        payoffs=pay_hist[:rounds_run],
        class_ids=class_ids,
        snapshots=snapshots,
    )
    return LearningResult(
        trajectory=trajectory,
        state=PerceptionState(x=x),
        converged=converged,
        rounds=rounds_run,
    )
