# -*- coding: utf-8 -*-
"""Online learning of the community sizes with exact per-round regret accounting."""

import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import ConfigError, InvalidInstanceError
from .adaptive import (
    AdaptiveGapTable,
    TransitionList,
    expected_reward_from_list,
    simulate_greedy_policy,
    transition_list_for_rates,
)
from .estimation import EstimatorState, EstimatorVariant, confidence_bounds, update
from .model import CommunityInstance, Realization, RngHandle, RoundFeedback
from .nonadaptive import (
    Allocation,
    GapConstants,
    expected_reward,
    greedy_allocation,
    greedy_allocation_for_rates,
    simulate_nonadaptive,
)

logger = logging.getLogger(__name__)


class ExplorationMode(str, Enum):
    NONADAPTIVE = "nonadaptive"
    ADAPTIVE = "adaptive"


class LearnerVariant(str, Enum):
    """Estimator fed to the offline explorer each round.

    ``empirical_mean`` is the paired estimator with its radius forced to 0 and
    no chaining across rounds.
    """

    PAIRED_LCB = "paired_lcb"
    ROUND_AVERAGED_LCB = "round_averaged_lcb"
    CHAINED_EMPIRICAL = "chained_empirical"
    EMPIRICAL_MEAN = "empirical_mean"

    @property
    def estimator(self) -> EstimatorVariant:
        return {
            LearnerVariant.PAIRED_LCB: EstimatorVariant.PAIRED,
            LearnerVariant.ROUND_AVERAGED_LCB: EstimatorVariant.ROUND_AVERAGED,
            LearnerVariant.CHAINED_EMPIRICAL: EstimatorVariant.CHAINED,
            LearnerVariant.EMPIRICAL_MEAN: EstimatorVariant.PAIRED,
        }[self]

    @property
    def uses_radius(self) -> bool:
        return self in (LearnerVariant.PAIRED_LCB, LearnerVariant.ROUND_AVERAGED_LCB)


@dataclass(frozen=True)
class LearnerConfig:
    mode: ExplorationMode
    variant: LearnerVariant
    K: int
    horizon: int
    seed: int = 0
    sampled_regret: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", ExplorationMode(self.mode))
        object.__setattr__(self, "variant", LearnerVariant(self.variant))
        problems = []
        if self.K < 1:
            problems.append(f"per-round budget must be positive, got {self.K}")
        if self.horizon < 1:
            problems.append(f"horizon must be positive, got {self.horizon}")
        if problems:
            raise ConfigError(problems)

    def to_dict(self) -> Dict[str, object]:
        data = asdict(self)
        data["mode"] = self.mode.value
        data["variant"] = self.variant.value
        return data


@dataclass
class RegretCurve:
    """Instantaneous and cumulative regret of one learner run."""

    instantaneous: np.ndarray
    config: LearnerConfig
    sizes: Tuple[int, ...]
    cumulative: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.instantaneous = np.asarray(self.instantaneous, dtype=float)
        self.cumulative = np.cumsum(self.instantaneous)

    def __len__(self) -> int:
        return len(self.instantaneous)

    @property
    def final(self) -> float:
        return float(self.cumulative[-1]) if len(self) else 0.0

    def metadata(self) -> Dict[str, object]:
        return {"sizes": list(self.sizes), **self.config.to_dict()}


class RegretOracle:
    """Exact expected rewards of the offline optima and of the learner's actions, memoized."""

    def __init__(self, instance: CommunityInstance, K: int):
        self.instance = instance
        self.K = K
        self.best_allocation = greedy_allocation(instance, K)
        self.best_nonadaptive = expected_reward(instance, self.best_allocation)
        greedy_list = transition_list_for_rates(instance, [0] * instance.m, instance.rates)
        self.best_adaptive = expected_reward_from_list(greedy_list, K)
        self._allocations: Dict[Allocation, float] = {}
        self._lists: Dict[Tuple[float, ...], float] = {}

    def nonadaptive_regret(self, alloc: Allocation) -> float:
        value = self._allocations.get(alloc)
        if value is None:
            value = self._allocations[alloc] = expected_reward(self.instance, alloc)
        return self.best_nonadaptive - value

    def adaptive_regret(self, tl: TransitionList) -> float:
        value = self._lists.get(tl.probs)
        if value is None:
            value = self._lists[tl.probs] = expected_reward_from_list(tl, self.K)
        return self.best_adaptive - value


def transition_list_policy(
    instance: CommunityInstance, bounds: Sequence[float], counts: Optional[Sequence[int]] = None
) -> TransitionList:
    """Transition list of the policy exploring argmax_i (1 - c_i * bounds_i)."""
    if len(bounds) != instance.m:
        raise InvalidInstanceError(f"{len(bounds)} bounds for {instance.m} communities")
    if any(not 0.0 <= b <= 1.0 for b in bounds):
        raise InvalidInstanceError(f"bounds must lie in [0, 1], got {list(bounds)}")
    counts = [0] * instance.m if counts is None else counts
    return transition_list_for_rates(instance, counts, [float(b) for b in bounds])


def learner_bounds(config: LearnerConfig, estimator: EstimatorState, round_index: int) -> np.ndarray:
    """Rates handed to the offline explorer: lower confidence bounds or plain means."""
    if config.variant.uses_radius:
        return confidence_bounds(estimator, round_index)[0]
    return np.asarray(estimator.mu_hat, dtype=float)


def run_round_nonadaptive(
    config: LearnerConfig,
    instance: CommunityInstance,
    estimator: EstimatorState,
    rng: RngHandle,
    round_index: int,
    bounds: Optional[Sequence[float]] = None,
    oracle: Optional[RegretOracle] = None,
) -> Tuple[Allocation, RoundFeedback, float]:
    """One round: allocate greedily on the bounds, explore, learn, and score the allocation.

    ``bounds`` replaces the estimator's bounds when given.
    """
    if round_index < 1:
        raise InvalidInstanceError(f"round index must be at least 1, got {round_index}")
    if bounds is None:
        bounds = learner_bounds(config, estimator, round_index)
    oracle = oracle or RegretOracle(instance, config.K)

    alloc = greedy_allocation_for_rates([float(b) for b in bounds], config.K)
    realization = Realization(instance, rng)
    feedback, distinct = simulate_nonadaptive(instance, alloc, rng, realization=realization)
    update(estimator, feedback, round_index)

    if config.sampled_regret:
        _, best = simulate_nonadaptive(instance, oracle.best_allocation, rng, realization=realization)
        regret = float(best - distinct)
    else:
        regret = oracle.nonadaptive_regret(alloc)
    return alloc, feedback, regret


def run_round_adaptive(
    config: LearnerConfig,
    instance: CommunityInstance,
    estimator: EstimatorState,
    rng: RngHandle,
    round_index: int,
    bounds: Optional[Sequence[float]] = None,
    oracle: Optional[RegretOracle] = None,
) -> Tuple[Tuple[int, ...], RoundFeedback, float]:
    """One round of K adaptive steps on the bounds; returns the explored sequence of communities."""
    if round_index < 1:
        raise InvalidInstanceError(f"round index must be at least 1, got {round_index}")
    if bounds is None:
        bounds = learner_bounds(config, estimator, round_index)
    bounds = [float(b) for b in bounds]
    oracle = oracle or RegretOracle(instance, config.K)

    trace: List[int] = []
    realization = Realization(instance, rng)
    feedback, distinct = simulate_greedy_policy(
        instance, config.K, rng, rates=bounds, realization=realization, trace=trace
    )
    update(estimator, feedback, round_index)

    if config.sampled_regret:
        _, best = simulate_greedy_policy(instance, config.K, rng, realization=realization)
        regret = float(best - distinct)
    else:
        regret = oracle.adaptive_regret(transition_list_policy(instance, bounds))
    return tuple(trace), feedback, regret


def run_experiment(
    config: LearnerConfig,
    instance: CommunityInstance,
    pinned_bounds: Optional[Sequence[float]] = None,
) -> RegretCurve:
    """Run ``config.horizon`` rounds and collect the regret curve.

    ``pinned_bounds`` freezes the rates fed to the explorer, bypassing the estimator.
    """
    rng = RngHandle(config.seed)
    estimator = EstimatorState.create(instance.m, config.variant.estimator)
    oracle = RegretOracle(instance, config.K)
    run_round = run_round_adaptive if config.mode is ExplorationMode.ADAPTIVE else run_round_nonadaptive

    regrets = np.empty(config.horizon)
    for t in range(1, config.horizon + 1):
        _, _, regrets[t - 1] = run_round(config, instance, estimator, rng, t, pinned_bounds, oracle)
    logger.debug(
        "%s/%s on %s seed=%d: cumulative regret %.4f",
        config.variant.value,
        config.mode.value,
        instance,
        config.seed,
        regrets.sum(),
    )
    return RegretCurve(regrets, config, instance.sizes)


def _inverse(x: float) -> float:
    return 0.0 if math.isinf(x) else 1.0 / x


def theoretical_bounds(
    instance: CommunityInstance,
    K: int,
    T: int,
    constants: Union[GapConstants, AdaptiveGapTable],
    variant: LearnerVariant = LearnerVariant.PAIRED_LCB,
) -> float:
    """Right-hand side of the regret bound matching the constants and the learner variant.

    Adaptive bounds use the per-community upper bound of the largest gap, so
    they are upper bounds of the stated bounds. The empirical-mean learner has
    no sublinear bound and gets ``inf``.
    """
    variant = LearnerVariant(variant)
    m = instance.m
    k_prime = K - m + 1
    pairs = math.comb(max(k_prime, 0), 2)
    log_t = math.log(T) if T >= 1 else 0.0

    if variant is LearnerVariant.EMPIRICAL_MEAN:
        return math.inf

    if isinstance(constants, GapConstants):
        if variant is LearnerVariant.CHAINED_EMPIRICAL:
            spread = 2 * m * math.e ** 2 * k_prime ** 2 * (k_prime - 1) ** 2
            return (2.0 + spread * _inverse(constants.delta_min) ** 2) * constants.delta_max
        inverse_sum = sum(_inverse(v) for v in constants.delta_min_per)
        if variant is LearnerVariant.ROUND_AVERAGED_LCB:
            return (
                48 * pairs ** 2 * log_t * inverse_sum
                + 2 * pairs * m
                + math.pi ** 2 / 3 * m * constants.delta_max
            )
        return (
            48 * pairs * K * log_t * inverse_sum
            + 2 * pairs * m
            + (k_prime // 2) * math.pi ** 2 / 3 * m * constants.delta_max
        )

    delta_max = constants.delta_max_upper
    if variant is LearnerVariant.CHAINED_EMPIRICAL:
        total = 0.0
        for i in range(m):
            for col in range(len(constants.ks)):
                total += (2.0 * _inverse(constants.epsilon[i, col]) ** 4 + 1.0) * delta_max[col]
        return total
    log_term = 0.0
    for i in range(m):
        for col in range(len(constants.ks)):
            log_term += 6.0 * delta_max[col] * _inverse(constants.delta_min[i, col]) ** 2
    return log_term * log_t + (k_prime // 2) * math.pi ** 2 / 3 * m * float(delta_max.sum())
