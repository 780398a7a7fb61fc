"""Experiment configuration: INI files with nested sections and key=value scalars.

A config names exactly one experiment kind plus the spec sections that kind
needs; ``--set section.key=value`` overrides individual scalars.  Unknown
sections or keys, missing requirements and malformed values all raise
:class:`ConfigError` with the offending ``[section] key`` named, so the CLI
can exit with a usable diagnostic.  The full schema is documented in the
README.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from typing import Optional

from .contact import ContactParams
from .game import FixedRegret, GameSpec, ZeroSum
from .learning import LearnerConfig
from .multiclass import ClassSpec, MultiClassSpec
from .threshold import CostDistribution, ThresholdGameSpec

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "apply_overrides"]

KINDS = (
    "pure-ne",
    "mixed-ne",
    "partial-eqs",
    "multiclass",
    "threshold",
    "learn",
    "oracle",
)


class ConfigError(ValueError):
    """Invalid experiment configuration; message names the offending key."""


@dataclass
class ExperimentConfig:
    """Parsed configuration: raw section/key strings plus typed accessors."""

    kind: str
    sections: dict = field(default_factory=dict)
    name: str = "custom"

    # -- raw access -------------------------------------------------------
    def _get(self, section: str, key: str, default=None, required: bool = False):
        sec = self.sections.get(section, {})
        if key not in sec:
            if required:
                raise ConfigError(f"[{section}] {key}: required for kind={self.kind}")
            return default
        return sec[key]

    def _typed(self, section: str, key: str, conv, default=None, required: bool = False):
        raw = self._get(section, key, default=None, required=required)
        if raw is None:
            return default
        try:
            return conv(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{section}] {key}: cannot parse {raw!r} ({exc})") from None

    def get_float(self, section, key, default=None, required=False):
        return self._typed(section, key, float, default, required)

    def get_int(self, section, key, default=None, required=False):
        return self._typed(section, key, lambda s: int(str(s), 0), default, required)

    def get_str(self, section, key, default=None, required=False):
        raw = self._get(section, key, default, required)
        return None if raw is None else str(raw)

    def get_bool(self, section, key, default=False):
        raw = self._get(section, key)
        if raw is None:
            return default
        if str(raw).lower() in ("1", "true", "yes", "on"):
            return True
        if str(raw).lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"[{section}] {key}: expected a boolean, got {raw!r}")

    @property
    def seed(self) -> int:
        return self.get_int("experiment", "seed", default=20260810)

    # -- spec builders ------------------------------------------------------
    def build_contact(self) -> ContactParams:
        try:
            return ContactParams(
                lam=self.get_float("contact", "lambda", required=True),
                tau=self.get_float("contact", "tau", required=True),
                num_sources=self.get_int("contact", "sources", default=1),
                routing=self.get_str("contact", "routing", default="two_hop"),
            )
        except ValueError as exc:
            raise ConfigError(f"[contact]: {exc}") from None

    def _scenario(self):
        name = self.get_str("game", "scenario", default="zero_sum")
        if name == "zero_sum":
            return ZeroSum()
        if name == "fixed_regret":
            return FixedRegret(alpha=self.get_float("game", "alpha", default=0.0))
        raise ConfigError(f"[game] scenario: unknown scenario {name!r}")

    def build_game_spec(self) -> GameSpec:
        contact = self.build_contact()
        r = self.get_float("game", "r")
        psi = self.get_int("game", "psi_target")
        if r is None and psi is None:
            raise ConfigError("[game] r: give a reward or a psi_target to derive it from")
        g = self.get_float("game", "g", required=True)
        if r is None:
            from .contact import reward_for_target

            r = reward_for_target(contact, g, psi)
        try:
            return GameSpec(
                n=self.get_int("game", "n", required=True),
                g=g,
                r=r,
                contact=contact,
                scenario=self._scenario(),
            )
        except ValueError as exc:
            raise ConfigError(f"[game]: {exc}") from None

    def build_multiclass_spec(self) -> MultiClassSpec:
        contact = self.build_contact()
        classes = []
        idx = 1
        while f"class.{idx}" in self.sections:
            sec = f"class.{idx}"
            g = self.get_float(sec, "g", required=True)
            r = self.get_float(sec, "r")
            psi = self.get_int(sec, "psi_target")
            if r is None and psi is None:
                raise ConfigError(f"[{sec}] r: give a reward or a psi_target")
            if r is None:
                from .contact import reward_for_target

                r = reward_for_target(contact, g, psi)
            try:
                classes.append(ClassSpec(count=self.get_int(sec, "count", required=True), g=g, r=r))
            except ValueError as exc:
                raise ConfigError(f"[{sec}]: {exc}") from None
            idx += 1
        if not classes:
            raise ConfigError("[class.1]: at least one class section is required")
        return MultiClassSpec(classes=tuple(classes), contact=contact)

    def build_cost_distribution(self) -> CostDistribution:
        kind = self.get_str("costs", "kind", required=True)
        try:
            if kind == "exponential":
                return CostDistribution.exponential(self.get_float("costs", "mean", required=True))
            if kind == "uniform":
                return CostDistribution.uniform(
                    self.get_float("costs", "lo", required=True),
                    self.get_float("costs", "hi", required=True),
                )
            if kind == "empirical":
                return CostDistribution.from_file(self.get_str("costs", "file", required=True))
        except ConfigError:
            raise
        except (ValueError, OSError) as exc:
            raise ConfigError(f"[costs]: {exc}") from None
        raise ConfigError(f"[costs] kind: unknown distribution {kind!r}")

    def build_threshold_spec(self) -> ThresholdGameSpec:
        try:
            return ThresholdGameSpec(
                n=self.get_int("threshold", "n", required=True),
                reward=self.get_float("threshold", "reward", required=True),
                contact=self.build_contact(),
                costs=self.build_cost_distribution(),
            )
        except ValueError as exc:
            raise ConfigError(f"[threshold]: {exc}") from None

    def build_learner_config(self) -> LearnerConfig:
        raw_beta = self.get_str("learn", "beta", default="inf")
        beta = math.inf if raw_beta in ("inf", "hard_max") else self._typed("learn", "beta", float)
        try:
            return LearnerConfig(
                beta=beta,
                step_rule=self.get_str("learn", "step", default="reciprocal"),
                step_scope=self.get_str("learn", "step_scope", default="per_action"),
                eps_stop=self.get_float("learn", "eps", default=1e-9),
                max_rounds=self.get_int("learn", "rounds", default=10_000),
                payoff_mode=self.get_str("learn", "payoff", default="simulated"),
                init_activation=self.get_float("learn", "init_activation", default=0.5),
                anneal_rounds=self.get_int("learn", "anneal_rounds", default=0),
                beta_start=self.get_float("learn", "beta_start", default=0.1),
                beta_cap=self.get_float("learn", "beta_cap", default=1e6),
                snapshot_stride=self.get_int("learn", "snapshot_stride", default=0),
            )
        except ValueError as exc:
            raise ConfigError(f"[learn]: {exc}") from None

    def manifest_dict(self) -> dict:
        """Every resolved parameter, for the run manifest."""
        return {
            "kind": self.kind,
            "name": self.name,
            "seed": self.seed,
            "sections": {s: dict(kv) for s, kv in sorted(self.sections.items())},
        }


def parse_config(path) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            parser.read_file(fh, source=str(path))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    sections = {name: dict(parser.items(name)) for name in parser.sections()}
    kind = sections.get("experiment", {}).get("kind")
    if kind is None:
        raise ConfigError("[experiment] kind: required")
    if kind not in KINDS:
        raise ConfigError(f"[experiment] kind: unknown kind {kind!r}; expected one of {KINDS}")
    return ExperimentConfig(kind=kind, sections=sections, name=str(path))


def apply_overrides(config: ExperimentConfig, overrides) -> ExperimentConfig:
    """Apply ``section.key=value`` strings on top of a parsed config."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set {item!r}: expected section.key=value")
        dotted, value = item.split("=", 1)
        if "." not in dotted:
            raise ConfigError(f"--set {item!r}: expected section.key=value")
        section, key = dotted.rsplit(".", 1)
        config.sections.setdefault(section, {})[key] = value
        if section == "experiment" and key == "kind":
            if value not in KINDS:
                raise ConfigError(f"--set {item!r}: unknown kind {value!r}")
            config.kind = value
    return config
