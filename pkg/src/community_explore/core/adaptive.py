# -*- coding: utf-8 -*-
"""Adaptive exploration: the greedy policy, transition probability lists and their exact rewards.

A status-based policy meets its j-th new member when it leaves position j of
its transition list. The list holds the probability p_j of leaving that
position on one step, so the distinct-count distribution after t steps only
depends on the list (see :func:`reach_probabilities`).
"""

import functools
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import CommunityExploreError, InvalidInstanceError, SizeGuardError, UnsupportedBudgetError
from .model import CommunityInstance, ExplorationState, Realization, RngHandle, RoundFeedback

logger = logging.getLogger(__name__)

TIE_TOLERANCE = 1e-12
RECURSION_LIMIT = 12
VALUE_ITERATION_LIMIT = 10 ** 7


class RewardShape:
    """Non-decreasing reward f over the number of distinct members met; identity by default."""

    def __init__(self, values: Union[None, Sequence[float], Callable[[int], float]] = None):
        self._table: Optional[Tuple[float, ...]] = None
        self._func: Optional[Callable[[int], float]] = None
        if values is None:
            self._func = float
        elif callable(values):
            self._func = values
        else:
            self._table = tuple(float(v) for v in values)
            if any(b < a for a, b in zip(self._table, self._table[1:])):
                raise InvalidInstanceError("reward shape must be non-decreasing")

    @classmethod
    def identity(cls) -> "RewardShape":
        return cls()

    @property
    def is_identity(self) -> bool:
        return self._func is float

    def __call__(self, j: int) -> float:
        if self._table is not None:
            if not 0 <= j < len(self._table):
                raise InvalidInstanceError(f"reward shape undefined at {j}")
            return self._table[j]
        return float(self._func(j))

    def values(self, n: int, offset: int = 0) -> np.ndarray:
        """f'(j) = f(j + offset) - f(offset) for j = 0..n."""
        base = self(offset)
        out = np.array([self(j + offset) - base for j in range(n + 1)], dtype=float)
        if np.any(np.diff(out) < -TIE_TOLERANCE):
            raise InvalidInstanceError("reward shape must be non-decreasing")
        return out


def _shape(f: Optional[RewardShape]) -> RewardShape:
    return RewardShape.identity() if f is None else f


@dataclass(frozen=True)
class TransitionList:
    """Transition probabilities (p_0, ..., p_D) of a status-based policy.

    ``communities[j]`` is the community the policy explores while at position j.
    """

    probs: Tuple[float, ...]
    communities: Tuple[int, ...]

    @property
    def D(self) -> int:
        return len(self.probs) - 1

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)

    def loop_probs(self) -> np.ndarray:
        return 1.0 - self.as_array()

    def first_position(self, i: int) -> Optional[int]:
        try:
            return self.communities.index(i)
        except ValueError:
            return None

    def __len__(self) -> int:
        return len(self.probs)


def _entry_order(a: Tuple[float, int, int, float], b: Tuple[float, int, int, float]) -> int:
    # entries are (perceived, count, community, true probability)
    if abs(a[0] - b[0]) > TIE_TOLERANCE:
        return -1 if a[0] > b[0] else 1
    return -1 if (a[1], a[2]) < (b[1], b[2]) else (1 if (a[1], a[2]) > (b[1], b[2]) else 0)


def _index_order(a: Tuple[float, int], b: Tuple[float, int]) -> int:
    # entries are (unmet fraction, community)
    if abs(a[0] - b[0]) > TIE_TOLERANCE:
        return -1 if a[0] > b[0] else 1
    return a[1] - b[1]


def transition_list_for_rates(
    instance: CommunityInstance, counts: Sequence[int], rates: Sequence[float]
) -> TransitionList:
    """Transition list of the policy exploring argmax_i (1 - c_i * rates_i).

    Entries (i, c) for c = c_i..d_i are ranked by the perceived unmet fraction
    1 - c * rates_i (ties: fewer met members, then lower index) and carry the
    true probability (d_i - c) / d_i. The list stops at its first zero, where
    the policy is stuck, and is padded with zeros to length D + 1.
    """
    if len(rates) != instance.m or len(counts) != instance.m:
        raise InvalidInstanceError("rates and counts must have one entry per community")
    entries = []
    for i, (d, c_i, rate) in enumerate(zip(instance.sizes, counts, rates)):
        if not 0 <= c_i <= d:
            raise InvalidInstanceError(f"count c_{i}={c_i} outside [0, {d}]")
        true_rate = 1.0 / d
        for c in range(c_i, d + 1):
            perceived = 1.0 - c * rate
            true_prob = (d - c) / d
            if rate <= true_rate + TIE_TOLERANCE and perceived < true_prob - 1e-9:
                raise CommunityExploreError(
                    f"perceived unmet fraction {perceived} below the true {true_prob}"
                )
            entries.append((perceived, c, i, true_prob))
    entries.sort(key=functools.cmp_to_key(_entry_order))

    D = sum(d - c for d, c in zip(instance.sizes, counts))
    probs: List[float] = []
    tags: List[int] = []
    for perceived, c, i, true_prob in entries:
        probs.append(true_prob)
        tags.append(i)
        if true_prob == 0.0:
            break
    stuck = tags[-1]
    while len(probs) < D + 1:
        probs.append(0.0)
        tags.append(stuck)
    return TransitionList(tuple(probs), tuple(tags))


def transition_list_greedy(instance: CommunityInstance, state: ExplorationState) -> TransitionList:
    """The greedy list: the residual fractions sorted in descending order, zero-terminated."""
    return transition_list_for_rates(instance, state.counts, instance.rates)


def loop_probability_table(qs: Sequence[float], t: int) -> np.ndarray:
    """Table L[j, s] = L({q_0, ..., q_j}, s) for j < len(qs), s <= t.

    Uses L_j(s) = sum_{i <= j} q_i L_i(s - 1), classifying a multiset by its
    largest index.
    """
    qs = np.asarray(qs, dtype=float)
    table = np.empty((len(qs), t + 1))
    table[:, 0] = 1.0
    for s in range(1, t + 1):
        table[:, s] = np.cumsum(qs * table[:, s - 1])
    return table


def loop_probability(qs: Sequence[float], t: int) -> float:
    """Sum over size-t multisets of qs of the product of their elements."""
    if t < 0:
        raise InvalidInstanceError(f"step count must be non-negative, got {t}")
    if len(qs) == 0:
        return 1.0 if t == 0 else 0.0
    return float(loop_probability_table(qs, t)[-1, t])


def reach_probabilities(tl: TransitionList, t: int) -> np.ndarray:
    """Probability of having met exactly j new members after t steps, j = 0..min(t, D)."""
    if t < 0:
        raise InvalidInstanceError(f"step count must be non-negative, got {t}")
    n = min(t, tl.D) + 1
    p = tl.as_array()[:n]
    table = loop_probability_table(1.0 - p, t)
    prefix = np.concatenate(([1.0], np.cumprod(p[:-1])))
    j = np.arange(n)
    return prefix * table[j, t - j]


def expected_reward_from_list(
    tl: TransitionList, t: int, f: Optional[RewardShape] = None, offset: int = 0
) -> float:
    """Expected f-gain over t steps of the policy described by tl, from a state with offset met."""
    reach = reach_probabilities(tl, t)
    gains = _shape(f).values(len(reach) - 1, offset)
    return float(np.dot(gains, reach))


def expected_reward_greedy(
    instance: CommunityInstance, K: int, f: Optional[RewardShape] = None
) -> float:
    """Exact expected reward of the greedy adaptive policy with budget K."""
    if K < 0:
        raise InvalidInstanceError(f"budget must be non-negative, got {K}")
    tl = transition_list_greedy(instance, ExplorationState.empty(instance, track_members=False))
    return expected_reward_from_list(tl, K, f)


def select_community(counts: Sequence[int], rates: Sequence[float]) -> int:
    """argmax_i (1 - c_i * rates_i); ties go to fewer met members, then lower index."""
    perceived = [1.0 - c * r for c, r in zip(counts, rates)]
    best = max(perceived)
    return min(
        (i for i, v in enumerate(perceived) if best - v <= TIE_TOLERANCE),
        key=lambda i: (counts[i], i),
    )


def simulate_greedy_policy(
    instance: CommunityInstance,
    K: int,
    rng: RngHandle,
    rates: Optional[Sequence[float]] = None,
    truncate: bool = False,
    realization: Optional[Realization] = None,
    trace: Optional[List[int]] = None,
) -> Tuple[RoundFeedback, int]:
    """Run K adaptive steps; returns the feedback in exploration order and the distinct count.

    ``rates`` defaults to the true rates (the greedy policy); lower bounds give
    the learner's policy. With ``truncate`` the run stops once everybody is met.
    Explored community indices are appended to ``trace`` when given.
    """
    if K < 0:
        raise InvalidInstanceError(f"budget must be non-negative, got {K}")
    rates = instance.rates if rates is None else tuple(rates)
    if realization is None:
        realization = Realization(instance, rng)
    state = ExplorationState.empty(instance)
    sequences: List[List[int]] = [[] for _ in range(instance.m)]
    everybody = instance.total_members

    for _ in range(K):
        if truncate and state.total == everybody:
            break
        i = select_community(state.counts, rates)
        if trace is not None:
            trace.append(i)
        local = realization.member(i, len(sequences[i]))
        sequences[i].append(local)
        state.met[i].add(local)
        state.counts[i] = len(state.met[i])
    return RoundFeedback.from_lists(sequences), state.total


def _greedy_recursion(
    sizes: Tuple[int, ...], counts: Tuple[int, ...], t: int, f: RewardShape, total: int
) -> float:
    if t == 0:
        return 0.0
    rates = [1.0 / d for d in sizes]
    i = select_community(counts, rates)
    s = (sizes[i] - counts[i]) / sizes[i]
    stay = _greedy_recursion(sizes, counts, t - 1, f, total)
    if s == 0.0:
        return stay
    advanced = counts[:i] + (counts[i] + 1,) + counts[i + 1:]
    gain = f(total + 1) - f(total)
    return (1.0 - s) * stay + s * (gain + _greedy_recursion(sizes, advanced, t - 1, f, total + 1))


def _guard_recursion(t: int) -> None:
    if t > RECURSION_LIMIT:
        logger.warning("refusing a naive recursion over %d steps", t)
        raise SizeGuardError("naive recursion depth", t, RECURSION_LIMIT)


def greedy_reward_recursive(
    instance: CommunityInstance, state: ExplorationState, t: int, f: Optional[RewardShape] = None
) -> float:
    """F_g(s, t) by the one-step recursion; exponential, for testing only."""
    _guard_recursion(t)
    state.validate()
    return _greedy_recursion(instance.sizes, tuple(state.counts), t, _shape(f), state.total)


def first_step_reward_recursive(
    instance: CommunityInstance,
    state: ExplorationState,
    i: int,
    t: int,
    f: Optional[RewardShape] = None,
) -> float:
    """A(s, i, t): explore i once, then follow the greedy policy for t steps."""
    _guard_recursion(t)
    instance.check_index(i)
    f = _shape(f)
    counts = tuple(state.counts)
    total = state.total
    s = (instance.sizes[i] - counts[i]) / instance.sizes[i]
    stay = _greedy_recursion(instance.sizes, counts, t, f, total)
    if s == 0.0:
        return stay
    advanced = counts[:i] + (counts[i] + 1,) + counts[i + 1:]
    gain = f(total + 1) - f(total)
    return (1.0 - s) * stay + s * (gain + _greedy_recursion(instance.sizes, advanced, t, f, total + 1))


def reward_gap_first_step(
    instance: CommunityInstance,
    state: ExplorationState,
    i: int,
    t: int,
    f: Optional[RewardShape] = None,
) -> float:
    """Exact F_g(s, t + 1) - A(s, i, t) from the greedy transition list.

    The sum runs over the positions j before k, the first position of
    community i, weighted by the probability of sitting at j after t steps.
    """
    instance.check_index(i)
    tl = transition_list_greedy(instance, state)
    if i == tl.communities[0]:
        return 0.0

    s_i = (instance.sizes[i] - state.counts[i]) / instance.sizes[i]
    k = tl.first_position(i)
    if k is None:
        k = next(j for j, p in enumerate(tl.probs) if abs(p - s_i) <= TIE_TOLERANCE)

    p = tl.as_array()
    reach = reach_probabilities(tl, t)
    gains = _shape(f).values(k, state.total)
    gap = 0.0
    for j in range(min(k, len(reach))):
        gap += (gains[j + 1] - gains[j]) * (p[j] - p[k]) * reach[j]
    return gap


def optimal_policy_value_oracle(
    instance: CommunityInstance, K: int, f: Optional[RewardShape] = None
) -> float:
    """Best achievable expected reward over all adaptive policies, by value iteration on counts."""
    lattice = tuple(d + 1 for d in instance.sizes)
    work = math.prod(lattice) * max(K, 1)
    if work > VALUE_ITERATION_LIMIT:
        logger.warning("refusing value iteration over %d states x steps", work)
        raise SizeGuardError("value iteration", work, VALUE_ITERATION_LIMIT)

    f = _shape(f)
    grids = np.indices(lattice)
    total = grids.sum(axis=0)
    everybody = instance.total_members
    if f.is_identity:
        gain = 1.0
    else:
        gain = np.vectorize(lambda c: f(int(c) + 1) - f(int(c)) if c < everybody else 0.0)(total)
    advance = [(d - grids[i]) / d for i, d in enumerate(instance.sizes)]

    value = np.zeros(lattice)
    for _ in range(K):
        candidates = []
        for i in range(instance.m):
            # wrapped entries sit where advance is 0
            moved = np.roll(value, -1, axis=i)
            candidates.append((1.0 - advance[i]) * value + advance[i] * (gain + moved))
        value = np.max(candidates, axis=0)
    return float(value[(0,) * instance.m])


@dataclass(frozen=True)
class UTable:
    """counts[i, k]: how often community i fills the first k positions of the greedy list."""

    counts: np.ndarray

    def __getitem__(self, key):
        return self.counts[key]

    def column(self, k: int) -> np.ndarray:
        return self.counts[:, k]

    @property
    def length(self) -> int:
        return self.counts.shape[1] - 1


def u_table(instance: CommunityInstance) -> UTable:
    """Occupancy counts of the empty-state greedy list, ties going to the lower community index."""
    entries = [(1.0 - c / d, i) for i, d in enumerate(instance.sizes) for c in range(d)]
    entries.sort(key=functools.cmp_to_key(_index_order))
    D = len(entries)
    counts = np.zeros((instance.m, D + 1), dtype=int)
    for k, (_, i) in enumerate(entries, start=1):
        counts[:, k] = counts[:, k - 1]
        counts[i, k] += 1
    return UTable(counts)


@dataclass(frozen=True)
class AdaptiveGapTable:
    """Per-(i, k) constants for k = m+1..min(K, D).

    ``delta_max_upper`` holds an upper bound of the largest reward gap, one
    value per k shared by every community.
    """

    ks: Tuple[int, ...]
    delta_min: np.ndarray
    epsilon: np.ndarray
    delta_max_upper: np.ndarray
    K: int
    m: int

    def column(self, k: int) -> int:
        if k not in self.ks:
            raise UnsupportedBudgetError(
                f"k={k} outside the range ({self.m}, {self.ks[-1] if self.ks else self.m}]"
            )
        return self.ks.index(k)

    def entry(self, i: int, k: int) -> Tuple[float, float, float]:
        col = self.column(k)
        return float(self.delta_min[i, col]), float(self.epsilon[i, col]), float(self.delta_max_upper[col])


def adaptive_gap_constants(
    instance: CommunityInstance, K: int, f: Optional[RewardShape] = None
) -> AdaptiveGapTable:
    m = instance.m
    table = u_table(instance)
    rates = instance.rates_array()
    top = min(K, table.length)
    ks = tuple(range(m + 1, top + 1))

    tl = transition_list_greedy(instance, ExplorationState.empty(instance, track_members=False))
    reach = reach_probabilities(tl, K)
    weighted = _shape(f).values(len(reach) - 1) * reach
    tail = np.cumsum(weighted[::-1])[::-1]

    delta_min = np.full((m, len(ks)), math.inf)
    epsilon = np.full((m, len(ks)), math.inf)
    delta_max = np.zeros(len(ks))
    for col, k in enumerate(ks):
        used = table.column(k)
        scaled = rates * used
        low = scaled.min()
        star = int(np.flatnonzero(scaled - low <= TIE_TOLERANCE)[0])
        for i in range(m):
            excess = scaled[i] - low
            if excess > TIE_TOLERANCE:
                delta_min[i, col] = excess / used[i]
            lead = scaled[i] - scaled[star]
            if i != star and lead > TIE_TOLERANCE:
                epsilon[i, col] = lead / (used[i] + used[star])
        delta_max[col] = tail[k] if k < len(tail) else 0.0
    return AdaptiveGapTable(ks, delta_min, epsilon, delta_max, K, m)
