# -*- coding: utf-8 -*-
"""Collision-counting estimators of the community rates mu_i = 1/d_i."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import EstimatorVariantError, InvalidInstanceError
from .model import RoundFeedback


class EstimatorVariant(str, Enum):
    """How a round's feedback is turned into collision observations."""

    PAIRED = "paired"
    ROUND_AVERAGED = "round_averaged"
    CHAINED = "chained"


@dataclass
class EstimatorState:
    """Per-community pair counts T_i, collision statistics X_i and means mu_hat_i.

    For the round-averaged variant T_i counts rounds with at least two visits
    and X_i sums the per-round collision frequencies. ``last_member`` is only
    used by the chained variant. Adjacent pairs there are pairwise but not
    mutually independent, so its effective sample size is about half of T_i.
    """

    variant: EstimatorVariant
    pairs: List[int]
    collisions: List[float]
    mu_hat: List[float]
    last_member: List[Optional[int]] = field(default_factory=list)

    @classmethod
    def create(cls, m: int, variant: EstimatorVariant = EstimatorVariant.PAIRED) -> "EstimatorState":
        return cls(EstimatorVariant(variant), [0] * m, [0.0] * m, [0.0] * m, [None] * m)

    @property
    def m(self) -> int:
        return len(self.pairs)

    def _require(self, variant: EstimatorVariant) -> None:
        if self.variant is not variant:
            raise EstimatorVariantError(
                f"{variant.value} update applied to a {self.variant.value} estimator"
            )

    def _check_feedback(self, feedback: RoundFeedback) -> None:
        if len(feedback) != self.m:
            raise InvalidInstanceError(
                f"feedback covers {len(feedback)} communities, estimator has {self.m}"
            )


def _pair_collisions(seq: Sequence[int]) -> Tuple[int, int]:
    """Disjoint consecutive pairs of seq and how many of them collide; an odd tail is dropped."""
    n = len(seq) // 2
    return n, sum(1 for x in range(n) if seq[2 * x] == seq[2 * x + 1])


def update_paired(state: EstimatorState, feedback: RoundFeedback) -> None:
    state._require(EstimatorVariant.PAIRED)
    state._check_feedback(feedback)
    for i, seq in enumerate(feedback):
        n, hits = _pair_collisions(seq)
        if n == 0:
            continue
        state.pairs[i] += n
        state.collisions[i] += hits
        state.mu_hat[i] = state.collisions[i] / state.pairs[i]


def update_round_averaged(state: EstimatorState, feedback: RoundFeedback) -> None:
    """One observation per community and round: the round's collision frequency."""
    state._require(EstimatorVariant.ROUND_AVERAGED)
    state._check_feedback(feedback)
    for i, seq in enumerate(feedback):
        if len(seq) <= 1:
            continue
        n, hits = _pair_collisions(seq)
        frequency = hits / n
        state.pairs[i] += 1
        state.collisions[i] += frequency
        state.mu_hat[i] += (frequency - state.mu_hat[i]) / state.pairs[i]


def update_chained(state: EstimatorState, feedback: RoundFeedback, round_index: int) -> None:
    """Adjacent pairs across the round, linked to the last member met in the previous round.

    In round 1, or for a community never visited before, the chain starts at
    the first member of this round.
    """
    state._require(EstimatorVariant.CHAINED)
    state._check_feedback(feedback)
    for i, seq in enumerate(feedback):
        if not seq:
            continue
        chain = list(seq)
        if round_index > 1 and state.last_member[i] is not None:
            chain.insert(0, state.last_member[i])
        state.pairs[i] += len(chain) - 1
        state.collisions[i] += sum(1 for a, b in zip(chain, chain[1:]) if a == b)
        state.last_member[i] = seq[-1]
        if state.pairs[i] > 0:
            state.mu_hat[i] = state.collisions[i] / state.pairs[i]


def update(state: EstimatorState, feedback: RoundFeedback, round_index: int) -> None:
    """Apply the update discipline of the state's own variant."""
    if state.variant is EstimatorVariant.PAIRED:
        update_paired(state, feedback)
    elif state.variant is EstimatorVariant.ROUND_AVERAGED:
        update_round_averaged(state, feedback)
    else:
        update_chained(state, feedback, round_index)


def confidence_bounds(state: EstimatorState, t: int) -> Tuple[np.ndarray, np.ndarray]:
    """Lower confidence bounds max(0, mu_hat - rho) with rho = sqrt(3 ln t / 2T); rho = 0 when T = 0."""
    if t < 1:
        raise InvalidInstanceError(f"round index must be at least 1, got {t}")
    pairs = np.asarray(state.pairs, dtype=float)
    mu_hat = np.asarray(state.mu_hat, dtype=float)
    radius = np.zeros(state.m)
    seen = pairs > 0
    radius[seen] = np.sqrt(3.0 * math.log(t) / (2.0 * pairs[seen]))
    lower = np.maximum(0.0, mu_hat - radius)
    return lower, radius


def size_estimates(state: EstimatorState) -> np.ndarray:
    """T_i / X_i, reported only; ``inf`` where no collision was seen yet."""
    pairs = np.asarray(state.pairs, dtype=float)
    collisions = np.asarray(state.collisions, dtype=float)
    out = np.full(state.m, math.inf)
    hit = collisions > 0
    out[hit] = pairs[hit] / collisions[hit]
    return out


def min_samples_for_collision(d: int, delta: float) -> int:
    """Samples from a size-d community that collide at least once with probability 1 - delta."""
    if d < 1:
        raise InvalidInstanceError(f"community size must be positive, got {d}")
    if not 0.0 < delta < 1.0:
        raise InvalidInstanceError(f"delta must lie in (0, 1), got {delta}")
    return int(math.ceil((1.0 + math.sqrt(8.0 * d * math.log(1.0 / delta) + 1.0)) / 2.0))
