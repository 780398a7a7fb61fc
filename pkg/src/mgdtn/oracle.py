"""Brute-force ground truth for small instances.

Everything here is computed by enumerating opponent action profiles
(2^(N-1) masks) or full profiles (2^N), with the per-relay closed forms
re-derived inline.  No numeric helper is shared with the solver modules:
disagreement between this module and a solver means one of them is wrong,
which is the point.

Feasible up to N = 20 for expected utilities and N = 16 for full pure-NE
enumeration; beyond that the solvers are on their own.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .game import FixedRegret, GameSpec
from .multiclass import MultiClassSpec

__all__ = [
    "OracleReport",
    "enumerate_pure_ne",
    "exact_expected_utility",
    "grid_mixed_ne",
    "grid_mixed_ne_2class",
    "fixed_point_oracle",
]

SpecT = Union[GameSpec, MultiClassSpec]

_IMPROVE_TOL = 1e-12


def _inline_params(spec: SpecT):
    """Per-relay (reward, cost) rows plus the inline failure probability."""
    contact = spec.contact
    lt = contact.lam * contact.tau
    q = math.exp(-lt) if contact.routing == "one_hop" else (1.0 + lt) * math.exp(-lt)
    if isinstance(spec, GameSpec):
        rewards = [spec.r] * spec.n
        costs = [spec.g] * spec.n
        alpha = spec.scenario.alpha if isinstance(spec.scenario, FixedRegret) else None
        silent_kind = "regret" if alpha is not None else "zero_sum"
    else:
        rewards, costs = [], []
        for c in spec.classes:
            rewards.extend([c.r] * c.count)
            costs.extend([c.g] * c.count)
        alpha = None
        silent_kind = "zero"
    return np.array(rewards), np.array(costs), q, silent_kind, alpha


def _active_value(reward, cost, q, n_s, tau, k):
    """Utility of an active relay at k total actives, written out longhand."""
    p_win = (1.0 - q**k) / k
    return n_s * reward * p_win - cost * tau


def _silent_value(reward, cost, q, n_s, tau, k_opponents, silent_kind, alpha):
    """Value of staying silent while k_opponents relays are active.

    Zero-sum relays forgo exactly what activating would have earned them, so
    the value is minus the active utility at k_opponents + 1; regret relays
    sit at -alpha and multi-class relays at 0.
    """
    if silent_kind == "zero":
        return 0.0
    if silent_kind == "regret":
        return -alpha
    return -_active_value(reward, cost, q, n_s, tau, k_opponents + 1)


def enumerate_pure_ne(spec: SpecT, n_max: int = 16) -> list:
    """All pure action profiles stable against unilateral deviation.

    Tests every one of the 2^N profiles with exact utilities.  Returned as
    tuples of 0/1 actions.
    """
    n = spec.n
    if n > n_max:
        raise ValueError(f"refusing to enumerate 2^{n} profiles (limit n_max={n_max})")
    rewards, costs, q, silent_kind, alpha = _inline_params(spec)
    n_s, tau = spec.contact.num_sources, spec.contact.tau

    stable = []
    for mask in range(1 << n):
        bits = [(mask >> i) & 1 for i in range(n)]
        k = sum(bits)
        ok = True
        for i in range(n):
            if bits[i]:
                have = _active_value(rewards[i], costs[i], q, n_s, tau, k)
                could = _silent_value(
                    rewards[i], costs[i], q, n_s, tau, k - 1, silent_kind, alpha
                )
            else:
                have = _silent_value(
                    rewards[i], costs[i], q, n_s, tau, k, silent_kind, alpha
                )
                could = _active_value(rewards[i], costs[i], q, n_s, tau, k + 1)
            if could > have + _IMPROVE_TOL:
                ok = False
                break
        if ok:
            stable.append(tuple(bits))
    return stable


def _opponent_count_weights(probs: Sequence[float]) -> np.ndarray:
    """P(exactly k of the opponents are active), by profile enumeration.

    Walks all 2^m opponent masks, multiplies per-relay Bernoulli factors and
    collapses by popcount; deliberately not the binomial-coefficient route
    the solvers take.
    """
    m = len(probs)
    masks = np.arange(1 << m, dtype=np.int64)
    weight = np.ones(1 << m)
    count = np.zeros(1 << m, dtype=np.int64)
    for j, p in enumerate(probs):
        bit = (masks >> j) & 1
        weight *= np.where(bit == 1, p, 1.0 - p)
        count += bit
    return np.bincount(count, weights=weight, minlength=m + 1)


def exact_expected_utility(
    spec: SpecT, relay_idx: int, action: str, mixed_profile: Sequence[float]
) -> float:
    """Expected utility of one relay's action against a mixed profile.

    Direct summation over every opponent action combination; the oracle
    behind the solver modules' binomial shortcuts.
    """
    n = spec.n
    if n > 20:
        raise ValueError("refusing to enumerate opponent profiles beyond N = 20")
    if action not in ("T", "S"):
        raise ValueError("action must be 'T' or 'S'")
    probs = [p for j, p in enumerate(mixed_profile) if j != relay_idx]
    if len(probs) != n - 1:
        raise ValueError(f"expected a mixed profile of length {n}")
    rewards, costs, q, silent_kind, alpha = _inline_params(spec)
    n_s, tau = spec.contact.num_sources, spec.contact.tau
    weights = _opponent_count_weights(probs)
    total = 0.0
    for k, w in enumerate(weights):
        if w == 0.0:
            continue
        if action == "T":
            val = _active_value(rewards[relay_idx], costs[relay_idx], q, n_s, tau, k + 1)
        else:
            val = _silent_value(
                rewards[relay_idx], costs[relay_idx], q, n_s, tau, k, silent_kind, alpha
            )
        total += w * val
    return total


def _deviation_gap(spec: SpecT, relay_idx: int, profile) -> float:
    return exact_expected_utility(spec, relay_idx, "T", profile) - exact_expected_utility(
        spec, relay_idx, "S", profile
    )


def grid_mixed_ne(spec: GameSpec, resolution: int = 1000) -> list:
    """Sign-change brackets of the symmetric indifference gap on a p-grid.

    Each returned (lo, hi) cell of width 1/resolution contains a symmetric
    mixed equilibrium; solvers' roots must fall inside one of them.
    """
    if resolution < 10:
        raise ValueError("resolution too coarse to bracket anything")
    grid = np.linspace(0.0, 1.0, resolution + 1)
    gaps = [
        _deviation_gap(spec, 0, [p] * spec.n) for p in grid
    ]
    brackets = []
    for i in range(resolution):
        if gaps[i] > 0.0 >= gaps[i + 1]:
            brackets.append((float(grid[i]), float(grid[i + 1])))
    return brackets


def grid_mixed_ne_2class(spec: MultiClassSpec, resolution: int = 200) -> list:
    """Bracket the coupled two-class crossing on a resolution^2 grid.

    For each p1 cell the class-2 gap is scanned for its sign change in p2;
    the class-1 gap along that ridge then brackets p1.  Returns cells
    (p1_lo, p1_hi, p2_lo, p2_hi).
    """
    if spec.num_classes != 2:
        raise ValueError("two-class bracketing needs exactly two classes")
    n1 = spec.classes[0].count
    grid = np.linspace(0.0, 1.0, resolution + 1)

    def profile(p1, p2):
        return [p1] * n1 + [p2] * spec.classes[1].count

    def inner_cell(p1):
        lo, hi = 0.0, 1.0
        g_lo = _deviation_gap(spec, n1, profile(p1, lo))
        g_hi = _deviation_gap(spec, n1, profile(p1, hi))
        if g_lo <= 0.0:
            return (0.0, 0.0)
        if g_hi >= 0.0:
            return (1.0, 1.0)
        for _ in range(40):  # bisect to well below one grid cell
            mid = 0.5 * (lo + hi)
            if _deviation_gap(spec, n1, profile(p1, mid)) > 0:
                lo = mid
            else:
                hi = mid
        return (lo, hi)

    cells = []
    prev_gap = None
    prev_cell = None
    for i, p1 in enumerate(grid):
        p2_cell = inner_cell(p1)
        gap1 = _deviation_gap(spec, 0, profile(p1, 0.5 * (p2_cell[0] + p2_cell[1])))
        if prev_gap is not None and (prev_gap > 0.0) != (gap1 > 0.0):
            cells.append(
                (
                    float(grid[i - 1]),
                    float(p1),
                    float(min(prev_cell[0], p2_cell[0])),
                    float(max(prev_cell[1], p2_cell[1])),
                )
            )
        prev_gap, prev_cell = gap1, p2_cell
    return cells


def fixed_point_oracle(
    spec: SpecT,
    beta: float,
    damping: float = 0.5,
    tol: float = 1e-10,
    max_iter: int = 20_000,
) -> np.ndarray:
    """Fixed point of the perception -> expected-payoff map, solved independently.

    Damped synchronous iteration x <- (1-eta) x + eta G(x) with G evaluated
    by profile enumeration (``exact_expected_utility``), nothing shared with
    the learning module's convolution path.  Converges under the contraction
    condition; raises if it fails to settle.
    """
    n = spec.n
    x = np.zeros((n, 2))
    for _ in range(max_iter):
        d = beta * (x[:, 0] - x[:, 1])
        sig = 1.0 / (1.0 + np.exp(-np.clip(d, -700.0, 700.0)))
        g = np.empty_like(x)
        for i in range(n):
            g[i, 0] = exact_expected_utility(spec, i, "T", sig)
            g[i, 1] = exact_expected_utility(spec, i, "S", sig)
        if np.abs(g - x).max() < tol:
            return g
        x = (1.0 - damping) * x + damping * g
    raise RuntimeError("independent fixed-point iteration did not settle")


@dataclass
class OracleReport:
    """Comparison verdicts for one instance; verdicts are PASS / FAIL / RECORDED."""

    instance: str
    checks: list = field(default_factory=list)  # (name, verdict, discrepancy)

    def add(self, name: str, verdict: str, discrepancy: float = 0.0) -> None:
        if verdict not in ("PASS", "FAIL", "RECORDED"):
            raise ValueError(f"unknown verdict {verdict!r}")
        self.checks.append((name, verdict, float(discrepancy)))

    @property
    def max_discrepancy(self) -> float:
        return max((d for _, _, d in self.checks), default=0.0)

    @property
    def failed(self) -> bool:
        return any(v == "FAIL" for _, v, _ in self.checks)

    def to_text(self) -> str:
        lines = [f"oracle report: {self.instance}"]
        for name, verdict, disc in self.checks:
            lines.append(f"  [{verdict}] {name} (|delta| = {disc:.3e})")
        return "\n".join(lines)

    def write_csv(self, path, append: bool = False) -> None:
        mode = "a" if append else "w"
        with open(path, mode, newline="") as fh:
            writer = csv.writer(fh)
            if not append:
                writer.writerow(["instance", "check", "verdict", "discrepancy"])
            for name, verdict, disc in self.checks:
                writer.writerow([self.instance, name, verdict, f"{disc!r}"])


# --------------------------------------------------------------------------
# randomized comparison suite


def random_small_instance(rng, n_max: int = 12):
    """One random interior game at brute-force-friendly size.

    Alternates homogeneous (both scenarios) and two-class specs; parameters
    are drawn so a lone relay profits, full activation loses money, and no
    utility sits within ~1e-9 of a tie (ties are legitimate knife edges but
    make set comparisons ambiguous).
    """
    import numpy as np

    from .contact import ContactParams, success_prob_first
    from .game import FixedRegret, GameSpec, ZeroSum
    from .multiclass import ClassSpec, MultiClassSpec

    while True:
        contact = ContactParams(
            lam=float(rng.uniform(0.01, 0.06)),
            tau=float(rng.uniform(50.0, 200.0)),
            num_sources=int(rng.integers(1, 3)),
        )
        flavor = int(rng.integers(0, 3))
        n = int(rng.integers(4, n_max + 1))
        p_hi = success_prob_first(contact, 1)
        p_lo = success_prob_first(contact, n)

        def interior_cost(r):
            frac = float(rng.uniform(0.15, 0.85))
            return contact.num_sources * r * (p_lo + frac * (p_hi - p_lo)) / contact.tau

        if flavor < 2:
            r = float(rng.uniform(0.2, 1.5))
            scenario = ZeroSum() if flavor == 0 else FixedRegret(alpha=float(rng.uniform(0.0, 0.05)))
            spec = GameSpec(n=n, g=interior_cost(r), r=r, contact=contact, scenario=scenario)
            from .game import utility_active

            utils = [utility_active(spec, k) for k in range(1, n + 1)]
            alpha = scenario.alpha
            if any(abs(u) < 1e-9 or abs(u + alpha) < 1e-9 for u in utils):
                continue
            return spec
        n1 = int(rng.integers(2, n - 1))
        n2 = n - n1
        r1, r2 = float(rng.uniform(0.2, 1.5)), float(rng.uniform(0.2, 1.5))
        spec = MultiClassSpec(
            classes=(
                ClassSpec(count=n1, g=interior_cost(r1), r=r1),
                ClassSpec(count=n2, g=interior_cost(r2), r=r2),
            ),
            contact=contact,
        )
        from .multiclass import class_utility_active

        utils = [
            class_utility_active(spec, j, k) for j in range(2) for k in range(1, n + 1)
        ]
        if any(abs(u) < 1e-9 for u in utils):
            continue
        return spec


def compare_instance(spec, index: int = 0, value_tol: float = 1e-6) -> OracleReport:
    """Run every applicable solver against its brute-force counterpart."""
    import numpy as np

    from .game import (
        FixedRegret,
        GameSpec,
        NoInteriorEquilibrium,
        fully_mixed_ne,
        indifference_fn,
        pure_ne,
        v_t,
    )
    from .multiclass import (
        MultiClassSpec,
        fully_mixed_ne_2class,
        indifference_pair,
        pure_ne_profiles,
    )

    rng = np.random.default_rng(1_000_003 * (index + 1))
    homog = isinstance(spec, GameSpec)
    label = (
        f"homogeneous N={spec.n} {type(spec.scenario).__name__}"
        if homog
        else f"2-class N={spec.n} ({spec.classes[0].count}+{spec.classes[1].count})"
    )
    report = OracleReport(instance=f"#{index} {label}")

    # pure equilibria: solver count sets vs exhaustive profile enumeration
    profiles = enumerate_pure_ne(spec)
    oracle_counts = sorted({sum(p) for p in profiles})
    if homog:
        solver_counts = sorted(pure_ne(spec).counts)
    else:
        solver_counts = sorted({sum(v) for v in pure_ne_profiles(spec)})
    report.add(
        "pure equilibrium active-count sets",
        "PASS" if solver_counts == oracle_counts else "FAIL",
        float(bool(solver_counts != oracle_counts)),
    )
    if not homog:
        from math import comb

        vectors = pure_ne_profiles(spec)
        n1 = spec.classes[0].count
        predicted = sum(comb(n1, v[0]) * comb(spec.classes[1].count, v[1]) for v in vectors)
        report.add(
            "pure profile count = sum of per-class binomials",
            "PASS" if predicted == len(profiles) else "FAIL",
            abs(predicted - len(profiles)),
        )

    # expected utilities at a random mixed profile
    probs = [float(p) for p in rng.uniform(0.05, 0.95, size=spec.n)]
    if homog:
        sym_p = float(rng.uniform(0.05, 0.95))
        delta = abs(
            indifference_fn(spec, sym_p)
            - (spec.scenario.alpha if isinstance(spec.scenario, FixedRegret) else 0.0)
            - exact_expected_utility(spec, 0, "T", [sym_p] * spec.n)
        )
        report.add(
            "indifference value vs profile enumeration",
            "PASS" if delta <= value_tol else "FAIL",
            delta,
        )
        l, s = int(rng.integers(0, 2)), int(rng.integers(0, 2))
        if l + s < spec.n - 1:
            mix_p = float(rng.uniform(0.1, 0.9))
            enum_profile = [1.0] * (l + 1) + [mix_p] * (spec.n - l - s - 1) + [0.0] * s
            delta = abs(
                v_t(spec, l + 1, s, mix_p) - exact_expected_utility(spec, 0, "T", enum_profile)
            )
            report.add(
                "pure/mixer split value vs profile enumeration",
                "PASS" if delta <= value_tol else "FAIL",
                delta,
            )
    else:
        p1, p2 = float(rng.uniform(0.05, 0.95)), float(rng.uniform(0.05, 0.95))
        n1 = spec.classes[0].count
        prof = [p1] * n1 + [p2] * spec.classes[1].count
        a1, a2 = indifference_pair(spec, p1, p2)
        d1 = abs(a1 - exact_expected_utility(spec, 0, "T", prof))
        d2 = abs(a2 - exact_expected_utility(spec, n1, "T", prof))
        report.add(
            "class indifference values vs profile enumeration",
            "PASS" if max(d1, d2) <= value_tol else "FAIL",
            max(d1, d2),
        )

    # mixed equilibria: solver root vs grid bracket + no profitable deviation
    if homog:
        try:
            p_star = fully_mixed_ne(spec)
        except NoInteriorEquilibrium:
            p_star = None
        brackets = grid_mixed_ne(spec, 2000)
        if p_star is None:
            report.add(
                "interior-equilibrium absence agrees",
                "PASS" if not brackets else "FAIL",
                float(len(brackets)),
            )
        else:
            inside = any(lo - 1e-12 <= p_star <= hi + 1e-12 for lo, hi in brackets)
            report.add("mixed root inside oracle bracket", "PASS" if inside else "FAIL")
            gap = abs(_deviation_gap(spec, 0, [p_star] * spec.n))
            report.add(
                "no profitable deviation at mixed root",
                "PASS" if gap <= value_tol else "FAIL",
                gap,
            )
    else:
        try:
            eq = fully_mixed_ne_2class(spec)
        except NoInteriorEquilibrium:
            eq = None
        if eq is not None and eq.fully_mixed:
            cells = grid_mixed_ne_2class(spec, 300)
            inside = any(
                lo1 - 1e-9 <= eq.p[0] <= hi1 + 1e-9 and lo2 - 1e-9 <= eq.p[1] <= hi2 + 1e-9
                for lo1, hi1, lo2, hi2 in cells
            )
            report.add("2-class root inside oracle cell", "PASS" if inside else "FAIL")
        if eq is not None:
            n1 = spec.classes[0].count
            prof = [eq.p[0]] * n1 + [eq.p[1]] * spec.classes[1].count
            worst = 0.0
            for relay, flag in ((0, eq.clamped[0]), (n1, eq.clamped[1])):
                gap = _deviation_gap(spec, relay, prof)
                if flag is None:
                    worst = max(worst, abs(gap))
                elif flag == "at_one":
                    worst = max(worst, max(0.0, -gap))
                else:
                    worst = max(worst, max(0.0, gap))
            report.add(
                "equilibrium deviation check (clamp-aware)",
                "PASS" if worst <= value_tol else "FAIL",
                worst,
            )
    return report


def compare_random_suite(
    seed: int, instances: int = 50, n_max: int = 12, workers: int = 1
) -> list:
    """Reports for a seeded family of random instances (criterion-6 shape)."""
    import numpy as np

    rng = np.random.default_rng(seed)
    specs = [random_small_instance(rng, n_max=n_max) for _ in range(instances)]
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda iv: compare_instance(iv[1], iv[0]), enumerate(specs)))
    return [compare_instance(s, i) for i, s in enumerate(specs)]
