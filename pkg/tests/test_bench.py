import math

import pytest
from hypothesis import given, strategies as st

from probseg import CostModel, SegmentList, simulate_batches


@pytest.mark.parametrize("n, k", [(10, 3), (9, 3), (1, 5), (7, 1)])
def test_uniform_lengths(n, k):
    plan = simulate_batches([40] * n, token_budget=40 * k)
    assert len(plan.batches) == math.ceil(n / k)
    assert plan.waste_ratio == 0


def test_greedy_hand_trace():
    plan = simulate_batches([10, 9, 1], token_budget=20)
    assert plan.batches == ((0, 1), (2,))
    assert plan.padded_frames == (20, 1)
    assert plan.padded_frames[0] - plan.real_frames[0] == 1


def test_sorted_longest_first():
    plan = simulate_batches([1, 10, 9], token_budget=20)
    assert plan.batches == ((1, 2), (0,))


def test_cost_model():
    plan = simulate_batches([10, 9, 1], token_budget=20, cost_model=CostModel(alpha=1, beta=0.5))
    assert plan.simulated_cost == (10 + 50) + (1 + 0.5)


def test_segment_list_input():
    plan = simulate_batches(SegmentList([(0, 10), (20, 29), (30, 31)]), token_budget=20)
    assert plan.batches == ((0, 1), (2,))


def test_oversized_segment_named():
    with pytest.raises(ValueError, match="segment 1"):
        simulate_batches([5, 50], token_budget=20)


def test_empty_rejected():
    with pytest.raises(ValueError):
        simulate_batches([])


@given(st.lists(st.integers(1, 500), min_size=1, max_size=200), st.integers(500, 5000))
def test_partition_and_budget(lengths, budget):
    plan = simulate_batches(lengths, token_budget=budget)
    flat = sorted(i for b in plan.batches for i in b)
    assert flat == list(range(len(lengths)))
    for b in plan.batches:
        assert max(lengths[i] for i in b) * len(b) <= budget
    assert 0 <= plan.waste_ratio < 1


@given(st.integers(1, 400), st.integers(1, 50), st.integers(1, 20))
def test_uniform_waste_is_zero_for_any_mean(length, n, k):
    plan = simulate_batches([length] * n, token_budget=length * k)
    assert plan.waste_ratio == 0
