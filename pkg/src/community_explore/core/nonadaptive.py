# -*- coding: utf-8 -*-
"""Non-adaptive exploration: expected reward of a budget allocation and its optimizers."""

import heapq
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import InvalidInstanceError, SizeGuardError, UnsupportedBudgetError
from .model import CommunityInstance, Realization, RngHandle, RoundFeedback

logger = logging.getLogger(__name__)

Allocation = Tuple[int, ...]

TIE_TOLERANCE = 1e-12
BRUTE_FORCE_LIMIT = 10 ** 7

TIE_BREAK_INDEX = "index"
TIE_BREAK_RANDOM = "random"


def _check_allocation(instance: CommunityInstance, alloc: Sequence[int]) -> Allocation:
    if len(alloc) != instance.m:
        raise InvalidInstanceError(
            f"allocation has {len(alloc)} entries for {instance.m} communities"
        )
    alloc = tuple(int(k) for k in alloc)
    if any(k < 0 for k in alloc):
        raise InvalidInstanceError(f"allocation {alloc} has negative entries")
    return alloc


def _check_budget(K: int) -> int:
    if K < 0:
        raise InvalidInstanceError(f"budget must be non-negative, got {K}")
    return int(K)


def expected_reward(instance: CommunityInstance, alloc: Sequence[int]) -> float:
    """r_k(mu) = sum_i d_i (1 - (1 - mu_i)^k_i)."""
    alloc = _check_allocation(instance, alloc)
    return sum(d * (1.0 - (1.0 - 1.0 / d) ** k) for d, k in zip(instance.sizes, alloc))


def expected_reward_for_rates(rates: Sequence[float], alloc: Sequence[int]) -> float:
    """The same reward written as a function of arbitrary rates.

    A zero rate stands for an infinite community: every visit meets somebody new.
    """
    total = 0.0
    for mu, k in zip(rates, alloc):
        total += float(k) if mu <= 0.0 else (1.0 - (1.0 - mu) ** k) / mu
    return total


def greedy_allocation_for_rates(
    rates: Sequence[float],
    K: int,
    initial: Optional[Sequence[int]] = None,
    tie_break: str = TIE_BREAK_INDEX,
    rng: Optional[RngHandle] = None,
) -> Allocation:
    """Spend K units one at a time on the largest marginal gain (1 - rate_i)^k_i.

    Gains within TIE_TOLERANCE of each other are ties; ties go to the community
    with the fewest units so far, then the lowest index. With
    ``tie_break="random"`` a tied community is drawn from ``rng`` instead.
    """
    K = _check_budget(K)
    counts = [0] * len(rates) if initial is None else [int(k) for k in initial]
    if tie_break == TIE_BREAK_RANDOM and rng is None:
        raise InvalidInstanceError("random tie-breaking needs an rng")

    heap = [(-((1.0 - mu) ** counts[i]), counts[i], i) for i, mu in enumerate(rates)]
    heapq.heapify(heap)
    for _ in range(K):
        top = heapq.heappop(heap)
        tied = [top]
        while heap and heap[0][0] - top[0] <= TIE_TOLERANCE:
            tied.append(heapq.heappop(heap))
        if tie_break == TIE_BREAK_RANDOM and len(tied) > 1:
            chosen = tied[int(rng.integers(len(tied)))]
        else:
            chosen = min(tied, key=lambda entry: (entry[1], entry[2]))
        for entry in tied:
            if entry is not chosen:
                heapq.heappush(heap, entry)
        i = chosen[2]
        counts[i] += 1
        heapq.heappush(heap, (-((1.0 - rates[i]) ** counts[i]), counts[i], i))
    return tuple(counts)


def greedy_allocation(
    instance: CommunityInstance,
    K: int,
    tie_break: str = TIE_BREAK_INDEX,
    rng: Optional[RngHandle] = None,
) -> Allocation:
    """Optimal allocation of K visits by greedy marginal gains on the true rates."""
    return greedy_allocation_for_rates(instance.rates, K, tie_break=tie_break, rng=rng)


class AllocationBounds(NamedTuple):
    """Real-valued lower and upper bounds on every optimal allocation."""

    lower: np.ndarray
    upper: np.ndarray

    def lower_ceil(self) -> Allocation:
        return tuple(int(math.ceil(v - 1e-9)) for v in self.lower)

    def upper_floor(self) -> Allocation:
        return tuple(int(math.floor(v + 1e-9)) for v in self.upper)


def allocation_bounds(instance: CommunityInstance, K: int) -> AllocationBounds:
    """Closed-form bounds k-_i <= k*_i <= k+_i for K > m.

    Size-1 communities get a zero share of the K - m free units and an upper
    bound of 1; the shares of the others are taken over communities of size
    at least 2 only.
    """
    m = instance.m
    if K <= m:
        raise UnsupportedBudgetError(f"allocation bounds need K > m, got K={K}, m={m}")

    lower = np.zeros(m)
    upper = np.ones(m)
    regular = [i for i, d in enumerate(instance.sizes) if d >= 2]
    if not regular:
        lower[0] = K - m
        upper[0] = K - m + 1
        return AllocationBounds(lower, upper)

    weights = np.array([1.0 / math.log1p(-1.0 / instance.sizes[i]) for i in regular])
    shares = weights / weights.sum()
    lower[regular] = (K - m) * shares
    upper[regular] = K * shares + 1.0
    return AllocationBounds(lower, upper)


def fast_allocation_detailed(instance: CommunityInstance, K: int) -> Tuple[Allocation, int]:
    """Fast allocation together with the number of greedy increments it needed."""
    m = instance.m
    K = _check_budget(K)
    if K <= m:
        return tuple(1 if i < K else 0 for i in range(m)), 0

    start = allocation_bounds(instance, K).lower_ceil()
    remaining = K - sum(start)
    alloc = greedy_allocation_for_rates(instance.rates, remaining, initial=start)
    logger.debug("fast allocation for %s, K=%d: %d greedy increments", instance, K, remaining)
    return alloc, remaining


def fast_allocation(instance: CommunityInstance, K: int) -> Allocation:
    """Optimal allocation from the rounded-up lower bound plus at most m greedy steps."""
    return fast_allocation_detailed(instance, K)[0]


def composition_count(K: int, m: int) -> int:
    return math.comb(K + m - 1, m - 1)


def compositions(K: int, m: int) -> Iterator[Allocation]:
    """All k in N^m with sum K (stars and bars)."""
    for bars in itertools.combinations(range(K + m - 1), m - 1):
        parts = []
        previous = -1
        for b in bars:
            parts.append(b - previous - 1)
            previous = b
        parts.append(K + m - 2 - previous)
        yield tuple(parts)


def _guard_compositions(instance: CommunityInstance, K: int) -> None:
    count = composition_count(K, instance.m)
    if count > BRUTE_FORCE_LIMIT:
        logger.warning("refusing to enumerate %d allocations for %s", count, instance)
        raise SizeGuardError("allocation enumeration", count, BRUTE_FORCE_LIMIT)


def _reward_tables(instance: CommunityInstance, K: int) -> List[List[float]]:
    return [[d * (1.0 - (1.0 - 1.0 / d) ** k) for k in range(K + 1)] for d in instance.sizes]


def brute_force_optimal(instance: CommunityInstance, K: int) -> Tuple[Allocation, float]:
    """Exhaustive search over every allocation spending exactly K."""
    K = _check_budget(K)
    _guard_compositions(instance, K)
    tables = _reward_tables(instance, K)
    best: Optional[Allocation] = None
    best_value = -math.inf
    for alloc in compositions(K, instance.m):
        value = sum(table[k] for table, k in zip(tables, alloc))
        if value > best_value + TIE_TOLERANCE:
            best, best_value = alloc, value
    return best, best_value


@dataclass(frozen=True)
class GapConstants:
    """Per-community reward gaps of suboptimal allocations that visit i more than once.

    ``math.inf`` / ``0.0`` mark communities without such an allocation.
    """

    K: int
    delta_min_per: Tuple[float, ...]
    delta_max_per: Tuple[float, ...]

    @property
    def delta_min(self) -> float:
        return min(self.delta_min_per)

    @property
    def delta_max(self) -> float:
        return max(self.delta_max_per)

    @property
    def k_prime(self) -> int:
        return self.K - len(self.delta_min_per) + 1


def gap_constants_nonadaptive(instance: CommunityInstance, K: int) -> GapConstants:
    K = _check_budget(K)
    _guard_compositions(instance, K)
    tables = _reward_tables(instance, K)
    values = [
        (alloc, sum(table[k] for table, k in zip(tables, alloc)))
        for alloc in compositions(K, instance.m)
    ]
    optimum = max(value for _, value in values)

    low = [math.inf] * instance.m
    high = [0.0] * instance.m
    for alloc, value in values:
        gap = optimum - value
        if gap <= TIE_TOLERANCE:
            continue
        for i, k in enumerate(alloc):
            if k > 1:
                low[i] = min(low[i], gap)
                high[i] = max(high[i], gap)
    return GapConstants(K, tuple(low), tuple(high))


def proportional_allocation(instance: CommunityInstance, K: int) -> Allocation:
    """k_i proportional to d_i, rounded by largest remainder so that sum k_i = K."""
    K = _check_budget(K)
    sizes = np.asarray(instance.sizes, dtype=float)
    exact = K * sizes / sizes.sum()
    alloc = np.floor(exact).astype(int)
    short = K - int(alloc.sum())
    # stable sort keeps lower indices first among equal remainders
    order = np.argsort(-(exact - alloc), kind="stable")
    alloc[order[:short]] += 1
    return tuple(int(k) for k in alloc)


def random_allocation(m: int, K: int, rng: RngHandle) -> Allocation:
    """Uniform draw over all compositions of K into m parts."""
    K = _check_budget(K)
    if m == 1:
        return (K,)
    bars = np.sort(rng.generator.choice(K + m - 1, size=m - 1, replace=False))
    edges = np.concatenate(([-1], bars, [K + m - 1]))
    return tuple(int(v) for v in np.diff(edges) - 1)


def simulate_nonadaptive(
    instance: CommunityInstance,
    alloc: Sequence[int],
    rng: RngHandle,
    truncate: bool = False,
    realization: Optional[Realization] = None,
) -> Tuple[RoundFeedback, int]:
    """Visit community i k_i times; return the feedback and the distinct-member count.

    With ``truncate`` a community is abandoned as soon as all its members are met.
    """
    alloc = _check_allocation(instance, alloc)
    if realization is None:
        realization = Realization(instance, rng, block=1)

    sequences = []
    distinct = 0
    for i, k in enumerate(alloc):
        seq = realization.prefix(i, k)
        if truncate:
            seen = set()
            for position, local in enumerate(seq):
                seen.add(local)
                if len(seen) == instance.sizes[i]:
                    seq = seq[: position + 1]
                    break
        sequences.append(seq)
        distinct += len(set(seq))
    return RoundFeedback(tuple(sequences)), distinct
