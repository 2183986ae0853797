import math

import numpy as np
import pytest

from community_explore.core.adaptive import (
    RewardShape,
    adaptive_gap_constants,
    expected_reward_from_list,
    expected_reward_greedy,
    first_step_reward_recursive,
    greedy_reward_recursive,
    loop_probability,
    loop_probability_table,
    optimal_policy_value_oracle,
    reach_probabilities,
    reward_gap_first_step,
    select_community,
    simulate_greedy_policy,
    transition_list_for_rates,
    transition_list_greedy,
    u_table,
)
from community_explore.core.model import ExplorationState, RngHandle, make_instance
from community_explore.core.nonadaptive import expected_reward, greedy_allocation
from community_explore.exceptions import (
    InvalidInstanceError,
    SizeGuardError,
    UnsupportedBudgetError,
)

DP_CASES = [
    ([2, 4], 3),
    ([3, 4], 5),
    ([2, 3, 3], 4),
    ([1, 2, 3], 5),
    ([2, 2, 5], 8),
]

GAP_STATES = [
    ([1, 2], [0, 1]),
    ([2, 3], [1, 0]),
    ([2, 4], [0, 1]),
    ([1, 2], [1, 0]),
]


def _empty(instance):
    return ExplorationState.empty(instance, track_members=False)


class TestTransitionList:
    def test_greedy_list(self):
        instance = make_instance([3, 4])
        tl = transition_list_greedy(instance, _empty(instance))
        assert tl.probs == pytest.approx((1, 1, 0.75, 2 / 3, 0.5, 1 / 3, 0.25, 0))
        assert tl.communities == (0, 1, 1, 0, 1, 0, 1, 0)
        assert tl.D == 7

    def test_from_a_state(self):
        instance = make_instance([2, 2])
        tl = transition_list_greedy(instance, ExplorationState.from_counts(instance, [1, 0]))
        assert tl.probs == pytest.approx((1, 0.5, 0.5, 0))

    def test_list_is_padded_after_first_zero(self):
        instance = make_instance([2, 3])
        # a zero rate keeps community 1 looking unexplored after it is exhausted
        tl = transition_list_for_rates(instance, [0, 0], [0.5, 0.0])
        assert len(tl) == instance.total_members + 1
        zero = tl.probs.index(0.0)
        assert all(p == 0.0 for p in tl.probs[zero:])

    def test_underestimated_rates_never_look_emptier(self):
        instance = make_instance([3, 4])
        tl = transition_list_for_rates(instance, [0, 0], [0.0, 0.0])
        assert tl.probs[:2] == (1.0, 1.0)
        assert len(tl) == 8

    def test_rejects_bad_counts(self):
        instance = make_instance([2, 3])
        with pytest.raises(InvalidInstanceError):
            transition_list_for_rates(instance, [3, 0], instance.rates)
        with pytest.raises(InvalidInstanceError):
            transition_list_for_rates(instance, [0], instance.rates)

    def test_first_position(self, two_four):
        tl = transition_list_greedy(two_four, _empty(two_four))
        assert tl.first_position(0) == 0
        assert tl.first_position(1) == 1


class TestLoopProbabilities:
    def test_small_multisets(self):
        assert loop_probability([0.5, 0.25], 2) == pytest.approx(0.4375)
        assert loop_probability([0.5, 0.25], 0) == 1.0
        assert loop_probability([], 0) == 1.0
        assert loop_probability([], 3) == 0.0

    def test_table_rows_are_prefixes(self):
        qs = [0.2, 0.7, 0.4]
        table = loop_probability_table(qs, 4)
        for j in range(3):
            assert table[j, 4] == pytest.approx(loop_probability(qs[: j + 1], 4))

    def test_negative_steps(self):
        with pytest.raises(InvalidInstanceError):
            loop_probability([0.5], -1)

    def test_swap_identity(self):
        generator = RngHandle(31).generator
        for _ in range(100):
            qs = list(generator.uniform(0.0, 1.0, size=int(generator.integers(2, 7))))
            t = int(generator.integers(1, 9))
            a, b = (int(v) for v in generator.choice(len(qs), size=2, replace=False))
            without_a = qs[:a] + qs[a + 1:]
            without_b = qs[:b] + qs[b + 1:]
            assert loop_probability(without_a, t) - loop_probability(without_b, t) == pytest.approx(
                (qs[b] - qs[a]) * loop_probability(qs, t - 1), rel=1e-9, abs=1e-12
            )

    @pytest.mark.parametrize("t", range(0, 11))
    def test_reach_probabilities_sum_to_one(self, t):
        instance = make_instance([3, 4])
        reach = reach_probabilities(transition_list_greedy(instance, _empty(instance)), t)
        assert len(reach) == min(t, 7) + 1
        assert reach.sum() == pytest.approx(1.0)
        assert np.all(reach >= 0)


class TestExactReward:
    @pytest.mark.parametrize("sizes, K", DP_CASES)
    def test_dp_matches_recursion(self, sizes, K):
        instance = make_instance(sizes)
        exact = expected_reward_greedy(instance, K)
        assert exact == pytest.approx(greedy_reward_recursive(instance, _empty(instance), K), abs=1e-9)

    @pytest.mark.parametrize("sizes, K", DP_CASES)
    def test_greedy_is_optimal(self, sizes, K):
        instance = make_instance(sizes)
        assert expected_reward_greedy(instance, K) == pytest.approx(
            optimal_policy_value_oracle(instance, K), abs=1e-9
        )

    @pytest.mark.parametrize("sizes, K", DP_CASES)
    def test_adaptive_beats_nonadaptive(self, sizes, K):
        instance = make_instance(sizes)
        nonadaptive = expected_reward(instance, greedy_allocation(instance, K))
        assert expected_reward_greedy(instance, K) >= nonadaptive - 1e-9

    def test_two_four(self, two_four):
        assert expected_reward_greedy(two_four, 3) == pytest.approx(2.75)
        assert expected_reward_greedy(two_four, 0) == 0.0

    def test_budget_beyond_everybody(self):
        instance = make_instance([1, 1])
        assert expected_reward_greedy(instance, 10) == pytest.approx(2.0)

    def test_non_decreasing_in_budget(self):
        generator = RngHandle(32).generator
        for _ in range(30):
            m = int(generator.integers(1, 5))
            instance = make_instance([int(d) for d in generator.integers(1, 8, size=m)])
            rewards = [expected_reward_greedy(instance, K) for K in range(0, instance.total_members + 3)]
            assert all(later >= earlier - 1e-9 for earlier, later in zip(rewards, rewards[1:]))

    def test_shaped_reward_matches_recursion(self, two_four):
        f = RewardShape([0, 1, 2, 2.5, 3, 3.2, 3.3])
        for K in range(0, 7):
            assert expected_reward_from_list(
                transition_list_greedy(two_four, _empty(two_four)), K, f
            ) == pytest.approx(greedy_reward_recursive(two_four, _empty(two_four), K, f), abs=1e-9)

    def test_reward_shape(self):
        f = RewardShape(lambda j: min(j, 2))
        assert list(f.values(3, offset=1)) == [0.0, 1.0, 1.0, 1.0]
        assert RewardShape().is_identity
        with pytest.raises(InvalidInstanceError):
            RewardShape([0, 2, 1])
        with pytest.raises(InvalidInstanceError):
            RewardShape([0, 1])(5)

    def test_value_iteration_guard(self):
        with pytest.raises(SizeGuardError):
            optimal_policy_value_oracle(make_instance([50, 50, 50, 50]), 10)

    def test_recursion_guard(self, two_four):
        with pytest.raises(SizeGuardError):
            greedy_reward_recursive(two_four, _empty(two_four), 13)


class TestRewardGap:
    def test_documented_values(self):
        instance = make_instance([1, 2])
        state = ExplorationState.from_counts(instance, [0, 1])
        assert reward_gap_first_step(instance, state, 1, 0) == pytest.approx(0.5)
        assert reward_gap_first_step(instance, state, 1, 1) == pytest.approx(0.0)

    def test_hand_computed(self):
        instance = make_instance([2, 3])
        state = ExplorationState.from_counts(instance, [1, 0])
        assert reward_gap_first_step(instance, state, 0, 1) == pytest.approx(1 / 6)
        assert reward_gap_first_step(instance, state, 0, 2) == pytest.approx(1 / 18)

    def test_greedy_choice_has_no_gap(self, two_four):
        assert reward_gap_first_step(two_four, _empty(two_four), 0, 3) == 0.0

    @pytest.mark.parametrize("sizes, counts", GAP_STATES)
    @pytest.mark.parametrize("t", range(0, 4))
    def test_matches_recursion(self, sizes, counts, t):
        instance = make_instance(sizes)
        state = ExplorationState.from_counts(instance, counts)
        for i in range(instance.m):
            expected = greedy_reward_recursive(instance, state, t + 1) - first_step_reward_recursive(
                instance, state, i, t
            )
            assert reward_gap_first_step(instance, state, i, t) == pytest.approx(expected, abs=1e-9)


class TestPolicy:
    @pytest.mark.parametrize(
        "counts, rates, expected",
        [
            ([1, 0], [0.5, 0.5], 1),
            ([0, 0], [0.25, 0.5], 0),
            ([1, 1], [0.0, 0.0], 0),
            ([2, 1], [0.0, 0.0], 1),
        ],
    )
    def test_select_community(self, counts, rates, expected):
        assert select_community(counts, rates) == expected

    def test_trace_and_feedback(self, two_four):
        trace = []
        feedback, distinct = simulate_greedy_policy(two_four, 3, RngHandle(1), trace=trace)
        assert trace == [0, 1, 1]
        assert distinct in (2, 3)
        assert feedback.total() == 3

    def test_truncation(self):
        instance = make_instance([1, 1])
        feedback, distinct = simulate_greedy_policy(instance, 5, RngHandle(0), truncate=True)
        assert feedback.total() == 2
        assert distinct == 2
        feedback, _ = simulate_greedy_policy(instance, 5, RngHandle(0))
        assert feedback.total() == 5

    def test_monte_carlo_mean(self):
        instance = make_instance([3, 4])
        rng = RngHandle(5)
        draws = [simulate_greedy_policy(instance, 5, rng)[1] for _ in range(4000)]
        assert np.mean(draws) == pytest.approx(expected_reward_greedy(instance, 5), abs=0.06)


class TestGapConstants:
    def test_u_table(self, two_four):
        table = u_table(two_four)
        assert table.length == 6
        assert list(table.column(0)) == [0, 0]
        assert list(table.column(3)) == [1, 2]
        assert list(table.column(6)) == [2, 4]

    def test_u_table_ties_go_to_lower_index(self):
        instance = make_instance([4, 2])
        table = u_table(instance)
        assert list(table.column(4)) == [3, 1]
        assert all(table.column(k).sum() == k for k in range(table.length + 1))

        gaps = adaptive_gap_constants(instance, 4)
        delta_min, epsilon, _ = gaps.entry(0, 4)
        assert delta_min == pytest.approx(1 / 12)
        assert epsilon == pytest.approx(1 / 16)
        assert math.isinf(gaps.entry(1, 4)[0])

    def test_balanced_column_is_infinite(self, two_four):
        gaps = adaptive_gap_constants(two_four, 3)
        assert gaps.ks == (3,)
        delta_min, epsilon, delta_max = gaps.entry(0, 3)
        assert math.isinf(delta_min)
        assert math.isinf(epsilon)
        assert delta_max == pytest.approx(2.25)
        assert math.isinf(gaps.entry(1, 3)[0])

    def test_unbalanced_column(self):
        gaps = adaptive_gap_constants(make_instance([2, 6]), 4)
        assert gaps.ks == (3, 4)
        delta_min, epsilon, _ = gaps.entry(0, 3)
        assert delta_min == pytest.approx(1 / 6)
        assert epsilon == pytest.approx(1 / 18)
        assert math.isinf(gaps.entry(1, 3)[0])
        assert math.isinf(gaps.entry(0, 4)[0])

    def test_out_of_range_column(self, two_four):
        with pytest.raises(UnsupportedBudgetError):
            adaptive_gap_constants(two_four, 3).column(2)

