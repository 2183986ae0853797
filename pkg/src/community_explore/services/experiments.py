# -*- coding: utf-8 -*-
"""Experiment runners: trial fan-out, aggregation and report rows for every experiment kind."""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.adaptive import adaptive_gap_constants, expected_reward_greedy, simulate_greedy_policy
from ..core.generators import DistributionSpec, generate_instance
from ..core.model import CommunityInstance, Realization, RngHandle, make_instance
from ..core.nonadaptive import (
    BRUTE_FORCE_LIMIT,
    allocation_bounds,
    composition_count,
    expected_reward,
    fast_allocation,
    gap_constants_nonadaptive,
    greedy_allocation,
    proportional_allocation,
    random_allocation,
    simulate_nonadaptive,
)
from ..core.online import ExplorationMode, LearnerConfig, LearnerVariant, run_experiment, theoretical_bounds
from ..utils import derive_seed
from .config import (
    KIND_ADAPTIVE_REWARD,
    KIND_ALLOCATE,
    KIND_ALLOCATION_DISTANCE,
    KIND_REGRET,
    KIND_REWARD_VS_BUDGET,
    KIND_USED_BUDGET,
    ExperimentConfig,
)
from .reporting import Report

logger = logging.getLogger(__name__)

METHOD_RANDOM = "random"
METHOD_PROPORTIONAL = "proportional"
METHOD_NONADAPTIVE = "nonadaptive_opt"
METHOD_ADAPTIVE = "adaptive_opt"
REWARD_METHODS = (METHOD_RANDOM, METHOD_PROPORTIONAL, METHOD_NONADAPTIVE, METHOD_ADAPTIVE)

METHOD_FULL_ALLOCATION = "optimal_allocation"
METHOD_TRUNCATED_ALLOCATION = "truncated_allocation"
METHOD_TRUNCATED_POLICY = "truncated_greedy_policy"
BUDGET_METHODS = (METHOD_FULL_ALLOCATION, METHOD_TRUNCATED_ALLOCATION, METHOD_TRUNCATED_POLICY)

ProgressCallback = Callable[[], None]


def _mean_std(values: Sequence[float]) -> Tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return float(arr.mean()), std


def reward_trial(sizes: Tuple[int, ...], K: int, seed: int) -> Dict[str, float]:
    """Realized reward of the four allocation methods on one shared realization."""
    instance = make_instance(sizes)
    rng = RngHandle(seed)
    random_alloc = random_allocation(instance.m, K, rng)
    realization = Realization(instance, rng)
    allocations = {
        METHOD_RANDOM: random_alloc,
        METHOD_PROPORTIONAL: proportional_allocation(instance, K),
        METHOD_NONADAPTIVE: greedy_allocation(instance, K),
    }
    rewards = {
        method: float(simulate_nonadaptive(instance, alloc, rng, realization=realization)[1])
        for method, alloc in allocations.items()
    }
    rewards[METHOD_ADAPTIVE] = float(simulate_greedy_policy(instance, K, rng, realization=realization)[1])
    return rewards


def used_budget_trial(sizes: Tuple[int, ...], K: int, seed: int) -> Dict[str, float]:
    """Budget actually consumed by k*, truncated k* and the truncated greedy policy."""
    instance = make_instance(sizes)
    rng = RngHandle(seed)
    realization = Realization(instance, rng)
    best = greedy_allocation(instance, K)
    full, _ = simulate_nonadaptive(instance, best, rng, realization=realization)
    truncated, _ = simulate_nonadaptive(instance, best, rng, truncate=True, realization=realization)
    policy, _ = simulate_greedy_policy(instance, K, rng, truncate=True, realization=realization)
    return {
        METHOD_FULL_ALLOCATION: float(full.total()),
        METHOD_TRUNCATED_ALLOCATION: float(truncated.total()),
        METHOD_TRUNCATED_POLICY: float(policy.total()),
    }


def distance_trial(spec_dict: Dict[str, Any], seed: int) -> Tuple[int, int]:
    """L1 distances of the rounded lower/upper bounds to k* on a random instance and budget."""
    spec = DistributionSpec.from_dict(spec_dict)
    rng = RngHandle(seed)
    instance = generate_instance(spec, rng)
    m = instance.m
    top = instance.total_members
    K = m + 1 if top <= m + 1 else int(rng.generator.integers(m + 1, top + 1))
    best = greedy_allocation(instance, K)
    bounds = allocation_bounds(instance, K)
    lower = sum(abs(a - b) for a, b in zip(bounds.lower_ceil(), best))
    upper = sum(abs(a - b) for a, b in zip(bounds.upper_floor(), best))
    return lower, upper


def regret_trial(sizes: Tuple[int, ...], mode: str, variant: str, K: int, horizon: int, seed: int,
                 sampled: bool) -> np.ndarray:
    config = LearnerConfig(ExplorationMode(mode), LearnerVariant(variant), K, horizon, seed, sampled)
    return run_experiment(config, make_instance(sizes)).cumulative


def _call(task: Tuple[Callable, tuple]) -> Any:
    fn, args = task
    return fn(*args)


class ExperimentRunner:
    """Run one configured experiment and collect its report.

    Trials are independent; with more than one worker they run in a process
    pool and their results are gathered in submission order.
    """

    def __init__(self, config: ExperimentConfig, progress: Optional[ProgressCallback] = None):
        self.config = config
        self.progress = progress

    def _fan_out(self, tasks: List[Tuple[Callable, tuple]]) -> List[Any]:
        results = []
        if self.config.workers > 1 and len(tasks) > 1:
            logger.debug("running %d trials on %d workers", len(tasks), self.config.workers)
            with ProcessPoolExecutor(max_workers=self.config.workers) as pool:
                for result in pool.map(_call, tasks):
                    results.append(result)
                    self._tick()
        else:
            for task in tasks:
                results.append(_call(task))
                self._tick()
        return results

    def _tick(self) -> None:
        if self.progress is not None:
            self.progress()

    def trial_count(self) -> int:
        c = self.config
        budgets = len(c.budgets())
        if c.kind in (KIND_REWARD_VS_BUDGET, KIND_USED_BUDGET):
            return budgets * c.replications
        if c.kind == KIND_ALLOCATION_DISTANCE:
            return len(c.distributions) * c.replications
        if c.kind == KIND_REGRET:
            return len(c.modes) * len(c.variants) * c.replications
        return 0

    def _instance(self) -> CommunityInstance:
        return make_instance(self.config.sizes)

    def run(self) -> Report:
        handlers = {
            KIND_ALLOCATE: self.run_allocate,
            KIND_ADAPTIVE_REWARD: self.run_adaptive_reward,
            KIND_REWARD_VS_BUDGET: self.run_reward_vs_budget,
            KIND_ALLOCATION_DISTANCE: self.run_allocation_distance,
            KIND_REGRET: self.run_regret,
            KIND_USED_BUDGET: self.run_used_budget,
        }
        logger.info("running %s experiment (config %s)", self.config.kind, self.config.config_hash())
        return handlers[self.config.kind]()

    def run_allocate(self) -> Report:
        instance = self._instance()
        K = self.config.budgets()[0]
        alloc = fast_allocation(instance, K) if self.config.fast else greedy_allocation(instance, K)
        if K > instance.m:
            bounds = allocation_bounds(instance, K)
            lower, upper = list(bounds.lower), list(bounds.upper)
        else:
            lower = upper = [math.nan] * instance.m
        report = Report(KIND_ALLOCATE, summary={"K": K, "expected_reward": expected_reward(instance, alloc)})
        for i, (d, mu) in enumerate(zip(instance.sizes, instance.rates)):
            report.add(i, d, mu, alloc[i], float(lower[i]), float(upper[i]))
        return report

    def run_adaptive_reward(self) -> Report:
        instance = self._instance()
        report = Report(KIND_ADAPTIVE_REWARD)
        for K in self.config.budgets():
            logger.info("exact rewards for K=%d", K)
            adaptive = expected_reward_greedy(instance, K)
            nonadaptive = expected_reward(instance, greedy_allocation(instance, K))
            report.add(K, adaptive, nonadaptive, adaptive - nonadaptive)
        return report

    def run_reward_vs_budget(self) -> Report:
        c = self.config
        sizes = tuple(c.sizes)
        budgets = c.budgets()
        tasks = [
            (reward_trial, (sizes, K, derive_seed(c.seed, K, r)))
            for K in budgets
            for r in range(c.replications)
        ]
        results = self._fan_out(tasks)
        report = Report(KIND_REWARD_VS_BUDGET)
        for b, K in enumerate(budgets):
            chunk = results[b * c.replications:(b + 1) * c.replications]
            for method in REWARD_METHODS:
                mean, std = _mean_std([trial[method] for trial in chunk])
                report.add(K, method, mean, std, len(chunk))
        return report

    def run_used_budget(self) -> Report:
        c = self.config
        sizes = tuple(c.sizes)
        budgets = c.budgets()
        tasks = [
            (used_budget_trial, (sizes, K, derive_seed(c.seed, K, r)))
            for K in budgets
            for r in range(c.replications)
        ]
        results = self._fan_out(tasks)
        report = Report(KIND_USED_BUDGET)
        for b, K in enumerate(budgets):
            chunk = results[b * c.replications:(b + 1) * c.replications]
            for method in BUDGET_METHODS:
                mean, std = _mean_std([trial[method] for trial in chunk])
                report.add(K, method, mean, std, len(chunk))
        return report

    def run_allocation_distance(self) -> Report:
        c = self.config
        tasks = [
            (distance_trial, (spec.to_dict(), derive_seed(c.seed, index, r)))
            for index, spec in enumerate(c.distributions)
            for r in range(c.replications)
        ]
        results = self._fan_out(tasks)
        report = Report(KIND_ALLOCATION_DISTANCE)
        for index, spec in enumerate(c.distributions):
            chunk = results[index * c.replications:(index + 1) * c.replications]
            lower = float(np.mean([pair[0] for pair in chunk]))
            upper = float(np.mean([pair[1] for pair in chunk]))
            report.add(spec.label, spec.m, lower, upper, len(chunk))
        return report

    def run_regret(self) -> Report:
        c = self.config
        sizes = tuple(c.sizes)
        K = c.budgets()[0]
        combos = [(mode, variant) for mode in c.modes for variant in c.variants]
        tasks = [
            (regret_trial, (sizes, mode.value, variant.value, K, c.horizon, derive_seed(c.seed, r), c.sampled_regret))
            for mode, variant in combos
            for r in range(c.replications)
        ]
        results = self._fan_out(tasks)

        report = Report(KIND_REGRET, summary={"K": K, "final_mean_cum_regret": {}, "regret_bounds": {}})
        for n, (mode, variant) in enumerate(combos):
            curves = np.vstack(results[n * c.replications:(n + 1) * c.replications])
            mean = curves.mean(axis=0)
            std = curves.std(axis=0, ddof=1) if c.replications > 1 else np.zeros(c.horizon)
            for t in range(c.horizon):
                report.add(t + 1, variant.value, mode.value, float(mean[t]), float(std[t]), c.replications)
            label = f"{variant.value}/{mode.value}"
            report.summary["final_mean_cum_regret"][label] = float(mean[-1])
            bound = self._regret_bound(make_instance(sizes), K, mode, variant)
            if bound is not None:
                report.summary["regret_bounds"][label] = bound
        return report

    def _regret_bound(self, instance: CommunityInstance, K: int, mode: ExplorationMode,
                      variant: LearnerVariant) -> Optional[Dict[str, Any]]:
        """Bound at the horizon, when its constants are computable for this instance."""
        if mode is ExplorationMode.NONADAPTIVE:
            if composition_count(K, instance.m) > BRUTE_FORCE_LIMIT:
                return None
            constants = gap_constants_nonadaptive(instance, K)
            value = theoretical_bounds(instance, K, self.config.horizon, constants, variant)
            return {"value": value, "upper_bound_of_bound": False}
        constants = adaptive_gap_constants(instance, K)
        value = theoretical_bounds(instance, K, self.config.horizon, constants, variant)
        return {"value": value, "upper_bound_of_bound": True}


def run(config: ExperimentConfig, progress: Optional[ProgressCallback] = None) -> Report:
    return ExperimentRunner(config, progress).run()
