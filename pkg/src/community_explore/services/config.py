# -*- coding: utf-8 -*-
"""Experiment configuration: layered documents, validation and the frozen run config."""

import copy
import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Set, Tuple

import psutil
import yaml

from ..core.generators import DistributionSpec
from ..core.online import ExplorationMode, LearnerVariant
from ..exceptions import ConfigError
from ..utils import config_hash

logger = logging.getLogger(__name__)

CONFIG_ENV = "COMMEXP_CONFIG"
ARGS_JSON_ENV = "COMMEXP_ARGS_JSON"

KIND_ALLOCATE = "allocate"
KIND_REWARD_VS_BUDGET = "reward_vs_budget"
KIND_ALLOCATION_DISTANCE = "allocation_distance"
KIND_REGRET = "regret"
KIND_ADAPTIVE_REWARD = "adaptive_reward"
KIND_USED_BUDGET = "used_budget"

KINDS = (
    KIND_ALLOCATE,
    KIND_REWARD_VS_BUDGET,
    KIND_ALLOCATION_DISTANCE,
    KIND_REGRET,
    KIND_ADAPTIVE_REWARD,
    KIND_USED_BUDGET,
)

# fields that do not change the produced rows
_UNHASHED = ("output", "workers")


@dataclass(frozen=True)
class ExperimentConfig:
    """Effective configuration of one experiment run."""

    kind: str
    sizes: Optional[Tuple[int, ...]]
    distributions: Tuple[DistributionSpec, ...] = ()
    budget: Optional[int] = None
    budget_range: Optional[Tuple[int, int, int]] = None
    horizon: int = 1000
    replications: int = 10
    seed: int = 0
    output: str = "results"
    variants: Tuple[LearnerVariant, ...] = (LearnerVariant.PAIRED_LCB,)
    modes: Tuple[ExplorationMode, ...] = (ExplorationMode.NONADAPTIVE,)
    workers: int = 1
    sampled_regret: bool = False
    fast: bool = False

    def budgets(self) -> List[int]:
        if self.budget_range is not None:
            lo, hi, step = self.budget_range
            return list(range(lo, hi + 1, step))
        return [] if self.budget is None else [self.budget]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "sizes": None if self.sizes is None else list(self.sizes),
            "distributions": [spec.to_dict() for spec in self.distributions],
            "budget": self.budget,
            "budget_range": None if self.budget_range is None else list(self.budget_range),
            "horizon": self.horizon,
            "replications": self.replications,
            "seed": self.seed,
            "output": self.output,
            "variants": [v.value for v in self.variants],
            "modes": [mode.value for mode in self.modes],
            "workers": self.workers,
            "sampled_regret": self.sampled_regret,
            "fast": self.fast,
        }

    def config_hash(self) -> str:
        data = self.to_dict()
        for key in _UNHASHED:
            data.pop(key)
        return config_hash(data)


class ConfigManager:
    """Layered configuration: defaults < file < COMMEXP_ARGS_JSON < runtime overrides.

    Overrides are applied in memory only; nothing is written back.
    """

    def __init__(self, config_path: Optional[str] = None, runtime_overrides: Optional[Dict[str, Any]] = None):
        env_config = os.getenv(CONFIG_ENV)
        if config_path is None and env_config:
            config_path = env_config
        self.config_path = Path(config_path) if config_path else None

        self._runtime_overrides = {k: v for k, v in (runtime_overrides or {}).items() if v is not None}
        self._explicit: Set[str] = set()
        self._unknown: List[str] = []
        self.config = self.load_config()
        self._apply_env_overrides()
        if self._runtime_overrides:
            self._apply_layer(self._runtime_overrides, "command line")

    def get_default_config(self) -> Dict[str, Any]:
        return {
            "version": "1.0",
            "kind": KIND_REGRET,
            "sizes": [2, 3, 5, 6, 8, 10],
            "distributions": [],
            "budget": 20,
            "budget_range": None,
            "horizon": 1000,
            "replications": 10,
            "seed": 0,
            "variants": [LearnerVariant.PAIRED_LCB.value],
            "modes": [ExplorationMode.NONADAPTIVE.value],
            "sampled_regret": False,
            "fast": False,
            "runner": {
                "workers": "auto",
                "output": "results",
            },
        }

    def load_config(self) -> Dict[str, Any]:
        defaults = self.get_default_config()
        if self.config_path is None:
            return defaults
        if not self.config_path.exists():
            raise ConfigError(f"config file not found: {self.config_path}")
        try:
            with open(self.config_path, "r", encoding="utf-8") as f:
                # JSON documents are valid YAML
                document = yaml.safe_load(f)
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(f"cannot read {self.config_path}: {e}") from e
        if document is None:
            document = {}
        if not isinstance(document, dict):
            raise ConfigError(f"{self.config_path} must hold a mapping at the top level")
        logger.info("loaded config from %s", self.config_path)
        self._record_keys(document, defaults, str(self.config_path))
        return self._merge_config(defaults, document)

    def _merge_config(self, default: Dict, user: Dict) -> Dict:
        """Recursive merge; user values win."""
        result = copy.deepcopy(default)
        for key, value in user.items():
            if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                result[key] = self._merge_config(result[key], value)
            else:
                result[key] = value
        return result

    def _record_keys(self, layer: Dict[str, Any], defaults: Dict[str, Any], source: str) -> None:
        for key, value in layer.items():
            if key not in defaults:
                self._unknown.append(f"unknown config key {key!r} ({source})")
                continue
            if isinstance(defaults[key], dict) and isinstance(value, dict):
                for sub in value:
                    if sub not in defaults[key]:
                        self._unknown.append(f"unknown config key '{key}.{sub}' ({source})")
            self._explicit.add(key)

    def _apply_layer(self, layer: Dict[str, Any], source: str) -> None:
        nested: Dict[str, Any] = {}
        for key, value in layer.items():
            if "." in key:
                head, tail = key.split(".", 1)
                nested.setdefault(head, {})[tail] = value
            else:
                nested[key] = value
        self._record_keys(nested, self.get_default_config(), source)
        self.config = self._merge_config(self.config, nested)

    def _apply_env_overrides(self) -> None:
        """COMMEXP_ARGS_JSON: a JSON object of field overrides."""
        args_json = os.getenv(ARGS_JSON_ENV)
        if not args_json:
            return
        try:
            data = json.loads(args_json)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{ARGS_JSON_ENV} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{ARGS_JSON_ENV} must be a JSON object")
        self._apply_layer(data, ARGS_JSON_ENV)

    def get(self, key: str, default: Any = None) -> Any:
        """Dotted-key lookup."""
        value = self.config
        for k in key.split("."):
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def set(self, key: str, value: Any) -> None:
        """Set a dotted key in memory."""
        self._apply_layer({key: value}, "set")

    def save_config(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(self.config, f, default_flow_style=False, sort_keys=True, indent=2)

    def _uses_distributions(self) -> bool:
        return bool(self.get("distributions"))

    def validate_config(self) -> List[str]:
        """Return every problem found; an empty list means the config is usable."""
        errors = list(self._unknown)

        kind = self.get("kind")
        if kind not in KINDS:
            errors.append(f"unknown experiment kind {kind!r}; expected one of {', '.join(KINDS)}")

        if self._uses_distributions() and "sizes" in self._explicit and self.get("sizes"):
            errors.append("'sizes' and 'distributions' are mutually exclusive")
        if self._uses_distributions():
            for index, spec in enumerate(self.get("distributions")):
                if not isinstance(spec, dict):
                    errors.append(f"distribution {index} must be a mapping")
                    continue
                try:
                    DistributionSpec.from_dict(spec)
                except ConfigError as e:
                    errors.extend(f"distribution {index}: {p}" for p in e.problems)
        else:
            sizes = self.get("sizes")
            if not isinstance(sizes, list) or not sizes:
                errors.append("'sizes' must be a non-empty list")
            elif not all(isinstance(d, int) and not isinstance(d, bool) and d >= 1 for d in sizes):
                errors.append(f"'sizes' must hold positive integers, got {sizes}")

        if kind == KIND_ALLOCATION_DISTANCE and not self._uses_distributions():
            errors.append("allocation_distance needs 'distributions'")
        if kind in (KIND_REGRET, KIND_ALLOCATE, KIND_ADAPTIVE_REWARD, KIND_REWARD_VS_BUDGET, KIND_USED_BUDGET) \
                and self._uses_distributions():
            errors.append(f"{kind} runs on explicit 'sizes'")

        errors.extend(self._validate_budget(kind))
        for name in ("horizon", "replications"):
            value = self.get(name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                errors.append(f"'{name}' must be a positive integer, got {value!r}")
        seed = self.get("seed")
        if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
            errors.append(f"'seed' must be a non-negative integer, got {seed!r}")

        for value in self.get("variants") or []:
            if value not in {v.value for v in LearnerVariant}:
                errors.append(f"unknown learner variant {value!r}")
        for value in self.get("modes") or []:
            if value not in {mode.value for mode in ExplorationMode}:
                errors.append(f"unknown exploration mode {value!r}")
        if kind == KIND_REGRET and not (self.get("variants") and self.get("modes")):
            errors.append("regret needs at least one variant and one mode")

        workers = self.get("runner.workers")
        if workers != "auto" and (not isinstance(workers, int) or isinstance(workers, bool) or workers < 1):
            errors.append(f"'runner.workers' must be 'auto' or a positive integer, got {workers!r}")
        for flag in ("sampled_regret", "fast"):
            if not isinstance(self.get(flag), bool):
                errors.append(f"'{flag}' must be true or false")
        return errors

    def _validate_budget(self, kind: Optional[str]) -> List[str]:
        errors = []
        budget = self.get("budget")
        budget_range = self.get("budget_range")
        if budget is not None and (not isinstance(budget, int) or isinstance(budget, bool) or budget < 1):
            errors.append(f"'budget' must be a positive integer, got {budget!r}")
        if budget_range is not None:
            if (
                not isinstance(budget_range, list)
                or len(budget_range) != 3
                or not all(isinstance(v, int) and not isinstance(v, bool) for v in budget_range)
            ):
                errors.append("'budget_range' must be [lo, hi, step] integers")
            else:
                lo, hi, step = budget_range
                if lo < 1 or hi < lo or step < 1:
                    errors.append(f"'budget_range' needs 1 <= lo <= hi and step >= 1, got {budget_range}")
        if kind != KIND_ALLOCATION_DISTANCE and budget is None and budget_range is None:
            errors.append(f"{kind} needs 'budget' or 'budget_range'")
        return errors

    def resolve_workers(self) -> int:
        workers = self.get("runner.workers")
        if workers == "auto":
            return psutil.cpu_count(logical=False) or 1
        return int(workers)

    def to_experiment_config(self) -> ExperimentConfig:
        errors = self.validate_config()
        if errors:
            for problem in errors:
                logger.warning("config problem: %s", problem)
            raise ConfigError(errors)
        uses_distributions = self._uses_distributions()
        budget_range = self.get("budget_range")
        return ExperimentConfig(
            kind=self.get("kind"),
            sizes=None if uses_distributions else tuple(self.get("sizes")),
            distributions=tuple(DistributionSpec.from_dict(d) for d in self.get("distributions") or []),
            budget=self.get("budget"),
            budget_range=None if budget_range is None else tuple(budget_range),
            horizon=self.get("horizon"),
            replications=self.get("replications"),
            seed=self.get("seed"),
            output=str(self.get("runner.output")),
            variants=tuple(LearnerVariant(v) for v in self.get("variants")),
            modes=tuple(ExplorationMode(mode) for mode in self.get("modes")),
            workers=self.resolve_workers(),
            sampled_regret=self.get("sampled_regret"),
            fast=self.get("fast"),
        )
