"""Experiment execution: dispatch, result CSVs, and the run manifest.

Output discipline: every run writes one or more CSV result files plus
``run_manifest.json`` holding all resolved parameters, the seed and the
package version, so any output can be regenerated bit-identically.  CSV
files are written to a temp name and renamed into place; float cells use
``repr`` so identical runs produce byte-identical bodies.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import game as game_mod
from . import multiclass as mc_mod
from . import threshold as th_mod
from .config import ConfigError, ExperimentConfig
from .learning import run_learning
from .oracle import compare_random_suite

__all__ = ["RunResult", "run_experiment", "worker_count"]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_UNCONVERGED = 2
EXIT_INVARIANT = 3


@dataclass
class RunResult:
    status: int = EXIT_OK
    files: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)


def worker_count() -> int:
    """Worker parallelism bound, from MG_DTN_THREADS (default 1)."""
    raw = os.environ.get("MG_DTN_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(out_dir, name, header, rows, result: RunResult) -> str:
    path = os.path.join(out_dir, name)
    fd, tmp = tempfile.mkstemp(dir=out_dir, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    result.files.append(path)
    return path


def _write_manifest(out_dir, config: ExperimentConfig, result: RunResult) -> None:
    manifest = {
        "artifact_version": __version__,
        "config": config.manifest_dict(),
        "summary": {k: _fmt(v) for k, v in sorted(result.summary.items())},
        "outputs": [os.path.basename(f) for f in result.files],
    }
    path = os.path.join(out_dir, "run_manifest.json")
    fd, tmp = tempfile.mkstemp(dir=out_dir, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)
    result.files.append(path)


# -- kind runners -----------------------------------------------------------


def _run_pure_ne(config, out_dir, result):
    spec = config.build_game_spec()
    eq = game_mod.pure_ne(spec)
    rows = [(k, eq.boundary or "") for k in eq.counts]
    _write_csv(out_dir, "pure_ne.csv", ["active_count", "boundary"], rows, result)
    _write_csv(
        out_dir,
        "utility_table.csv",
        ["k", "utility_active", "utility_silent"],
        [
            (k, game_mod.utility_active(spec, k), game_mod.utility_silent(spec, k))
            for k in range(1, spec.n + 1)
        ],
        result,
    )
    result.summary["comfort_level"] = game_mod.comfort_level(spec)


def _run_mixed_ne(config, out_dir, result):
    spec = config.build_game_spec()
    p_star = game_mod.fully_mixed_ne(spec)
    grid = np.linspace(0.0, 1.0, 201)
    _write_csv(
        out_dir,
        "indifference_curve.csv",
        ["p", "indifference_value"],
        [(float(p), game_mod.indifference_fn(spec, float(p))) for p in grid],
        result,
    )
    _write_csv(
        out_dir,
        "mixed_ne.csv",
        ["p_star", "expected_actives", "residual"],
        [(p_star, spec.n * p_star, game_mod.indifference_fn(spec, p_star))],
        result,
    )
    result.summary["p_star"] = p_star


def _run_partial_eqs(config, out_dir, result):
    spec = config.build_game_spec()
    eqs = game_mod.enumerate_partial_eqs(spec)
    rows = []
    for eq in eqs:
        residual = game_mod.v_t(spec, eq.num_pure_t + 1, eq.num_pure_s, eq.p_star) - game_mod.v_s(
            spec, eq.num_pure_t + 1, eq.num_pure_s, eq.p_star
        )
        rows.append((eq.num_pure_t, eq.num_pure_s, eq.p_star, residual))
    _write_csv(
        out_dir,
        "partial_equilibria.csv",
        ["pure_t", "pure_s", "p_star", "indifference_residual"],
        rows,
        result,
    )
    result.summary["found"] = len(eqs)
    result.summary["published_count"] = game_mod.predicted_partial_count(spec)


def _run_multiclass(config, out_dir, result):
    spec = config.build_multiclass_spec()
    if "fig1" in config.sections:
        _run_fig1_sweep(config, spec, out_dir, result)
        return
    targets = mc_mod.pure_targets(spec)
    _write_csv(
        out_dir,
        "pure_targets.csv",
        ["class", "count", "g", "r", "break_even_count"],
        [
            (j + 1, c.count, c.g, c.r, targets[j])
            for j, c in enumerate(spec.classes)
        ],
        result,
    )
    vectors = mc_mod.pure_ne_profiles(spec)
    _write_csv(
        out_dir,
        "pure_ne_profiles.csv",
        [f"class{j + 1}_active" for j in range(spec.num_classes)],
        vectors,
        result,
    )
    if spec.num_classes == 2:
        eq = mc_mod.fully_mixed_ne_2class(spec)
        _write_csv(
            out_dir,
            "mixed_ne.csv",
            ["p1", "p2", "clamped1", "clamped2", "expected_actives"],
            [
                (
                    eq.p[0],
                    eq.p[1],
                    eq.clamped[0] or "",
                    eq.clamped[1] or "",
                    spec.classes[0].count * eq.p[0] + spec.classes[1].count * eq.p[1],
                )
            ],
            result,
        )
        result.summary["p1"] = eq.p[0]
        result.summary["p2"] = eq.p[1]


def _run_fig1_sweep(config, spec, out_dir, result):
    lo = config.get_float("fig1", "r1_lo", required=True)
    hi = config.get_float("fig1", "r1_hi", required=True)
    steps = config.get_int("fig1", "r1_steps", default=36)
    rows = []
    for r1 in np.linspace(lo, hi, steps):
        swept = mc_mod.MultiClassSpec(
            classes=(
                mc_mod.ClassSpec(spec.classes[0].count, spec.classes[0].g, float(r1)),
                spec.classes[1],
            ),
            contact=spec.contact,
        )
        try:
            eq = mc_mod.fully_mixed_ne_2class(swept)
            rows.append((float(r1), eq.p[0], eq.p[1], eq.clamped[0] or "", eq.clamped[1] or ""))
        except game_mod.NoInteriorEquilibrium:
            rows.append((float(r1), "", "", "none", "none"))
    _write_csv(
        out_dir, "fig1_mixed_ne_vs_r1.csv", ["r1", "p1", "p2", "clamped1", "clamped2"], rows, result
    )
    result.summary["sweep_points"] = len(rows)


def _run_threshold(config, out_dir, result):
    spec = config.build_threshold_spec()
    res = th_mod.solve_threshold(spec)
    result.summary["g_th"] = res.g_th
    result.summary["participation"] = res.participation
    _write_csv(
        out_dir,
        "threshold.csv",
        ["g_th", "participation", "expected_actives", "boundary"],
        [(res.g_th, res.participation, spec.n * res.participation, res.boundary or "")],
        result,
    )
    if "fig7" in config.sections:
        _run_fig7_surfaces(config, spec, out_dir, result)


def _run_fig7_surfaces(config, spec, out_dir, result):
    g_steps = config.get_int("fig7", "g_steps", default=60)
    r_values = [
        float(v) for v in config.get_str("fig7", "r_values", default="2,4,6,8,10,12").split(",")
    ]
    mu_lo = config.get_float("fig7", "mu_lo", default=0.001)
    mu_hi = config.get_float("fig7", "mu_hi", default=0.010)
    mu_steps = config.get_int("fig7", "mu_steps", default=19)
    psi_quote = config.get_int("fig7", "psi_quote", default=20)

    g_hi = spec.reward * th_mod.success_prob_first(spec.contact, 1) / spec.contact.tau
    theta_rows = []
    gth_rows = []
    for r_val in r_values:
        swept = th_mod.ThresholdGameSpec(
            n=spec.n, reward=r_val, contact=spec.contact, costs=spec.costs
        )
        for g in np.linspace(0.0, g_hi, g_steps + 1):
            theta_rows.append((r_val, float(g), th_mod.theta(swept, float(g))))
        sol = th_mod.solve_threshold(swept)
        gth_rows.append((r_val, sol.g_th, sol.participation * spec.n))
    _write_csv(out_dir, "fig7_theta_surface.csv", ["R", "g", "theta"], theta_rows, result)
    _write_csv(
        out_dir, "fig7_gth_vs_R.csv", ["R", "g_th", "expected_actives"], gth_rows, result
    )

    psi_rows = []
    for r_val in r_values:
        for mu in np.linspace(mu_lo, mu_hi, mu_steps):
            swept = th_mod.ThresholdGameSpec(
                n=spec.n,
                reward=r_val,
                contact=spec.contact,
                costs=th_mod.CostDistribution.exponential(float(mu)),
            )
            psi_rows.append((r_val, float(mu), th_mod.expected_actives(swept)))
    _write_csv(out_dir, "fig7_psi_surface.csv", ["R", "mu", "expected_actives"], psi_rows, result)

    mu = spec.costs.mean
    quote = th_mod.reward_from_mean(spec.contact, mu, psi_quote)
    requote = th_mod.reward_from_mean(spec.contact, result.summary["g_th"], psi_quote)
    _write_csv(
        out_dir,
        "fig7_reward_quotes.csv",
        ["mu", "g_th", "psi", "reward_from_mean", "reward_from_threshold"],
        [(mu, result.summary["g_th"], psi_quote, quote, requote)],
        result,
    )
    result.summary["reward_from_mean"] = quote
    result.summary["reward_from_threshold"] = requote


def _learn_spec(config):
    target = config.get_str("learn", "target", default="game")
    if target == "game":
        return config.build_game_spec(), np.zeros(0)
    if target == "multiclass":
        return config.build_multiclass_spec(), np.zeros(0)
    if target == "threshold":
        return config.build_threshold_spec(), np.zeros(0)
    raise ConfigError(f"[learn] target: unknown target {target!r}")


def _run_learn(config, out_dir, result, preset: str = ""):
    spec, _ = _learn_spec(config)
    learner = config.build_learner_config()
    res = run_learning(spec, learner, seed=config.seed)
    tr = res.trajectory
    stride = config.get_int("learn", "csv_stride", default=max(1, res.rounds // 2000))
    prefix = preset or "learn"

    sig_rows = []
    for t in range(0, res.rounds, stride):
        for j in range(tr.sigma.shape[1]):
            sig_rows.append(
                (t + 1, j, int(tr.class_ids[j]), float(tr.sigma[t, j]), int(tr.actions[t, j]))
            )
    _write_csv(
        out_dir,
        f"{prefix}_sigma.csv",
        ["round", "relay", "class", "sigma_T", "action"],
        sig_rows,
        result,
    )
    counts = tr.active_counts
    _write_csv(
        out_dir,
        f"{prefix}_active_count.csv",
        ["round", "active_count"],
        [(t + 1, int(counts[t])) for t in range(0, res.rounds, stride)],
        result,
    )
    tail = 0.2
    summary_rows = [
        ("rounds", res.rounds),
        ("converged", int(res.converged)),
        ("tail_mean_sigma", tr.tail_mean_sigma(tail)),
        ("tail_mean_active", tr.tail_mean_active(tail)),
    ]
    for cls in sorted(set(int(c) for c in tr.class_ids)):
        summary_rows.append((f"tail_mean_sigma_class{cls + 1}", tr.tail_mean_sigma(tail, cls)))
    if isinstance(spec, mc_mod.MultiClassSpec) and spec.num_classes == 2:
        eq = mc_mod.fully_mixed_ne_2class(spec)
        summary_rows += [
            ("analytic_p1", eq.p[0]),
            ("analytic_p2", eq.p[1]),
            ("analytic_clamped", "|".join(c or "-" for c in eq.clamped)),
        ]
    elif isinstance(spec, game_mod.GameSpec):
        try:
            summary_rows.append(("analytic_p_star", game_mod.fully_mixed_ne(spec)))
        except game_mod.NoInteriorEquilibrium:
            pass
        summary_rows.append(("comfort_level", game_mod.comfort_level(spec)))
    _write_csv(out_dir, f"{prefix}_summary.csv", ["metric", "value"], summary_rows, result)
    result.summary.update({k: v for k, v in summary_rows})
    if not res.converged:
        result.status = EXIT_UNCONVERGED


def _run_oracle(config, out_dir, result):
    instances = config.get_int("oracle", "instances", default=50)
    n_max = config.get_int("oracle", "n_max", default=12)
    reports = compare_random_suite(
        seed=config.seed, instances=instances, n_max=n_max, workers=worker_count()
    )
    text_path = os.path.join(out_dir, "oracle_report.txt")
    with open(text_path, "w") as fh:
        for rep in reports:
            fh.write(rep.to_text() + "\n")
    result.files.append(text_path)
    csv_path = os.path.join(out_dir, "oracle_report.csv")
    for i, rep in enumerate(reports):
        rep.write_csv(csv_path, append=i > 0)
    result.files.append(csv_path)
    failures = sum(1 for r in reports if r.failed)
    result.summary["instances"] = len(reports)
    result.summary["failures"] = failures
    result.summary["max_discrepancy"] = max(r.max_discrepancy for r in reports)
    if failures:
        result.status = EXIT_INVARIANT


_KIND_RUNNERS = {
    "pure-ne": _run_pure_ne,
    "mixed-ne": _run_mixed_ne,
    "partial-eqs": _run_partial_eqs,
    "multiclass": _run_multiclass,
    "threshold": _run_threshold,
    "oracle": _run_oracle,
}


def run_experiment(config: ExperimentConfig, out_dir: str) -> RunResult:
    """Execute one experiment, returning the exit status and output files."""
    os.makedirs(out_dir, exist_ok=True)
    result = RunResult()
    if config.kind == "learn":
        preset = config.name if config.name.startswith("fig") else ""
        _run_learn(config, out_dir, result, preset=preset)
    else:
        _KIND_RUNNERS[config.kind](config, out_dir, result)
    _write_manifest(out_dir, config, result)
    return result
