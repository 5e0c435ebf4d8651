import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import naive_sma
from probseg import ProbStream, SmoothingConfig, moving_average

probs_lists = st.lists(st.floats(0, 1, width=32), min_size=0, max_size=300)


def test_zero_window_is_identity(make_stream):
    s = make_stream([0.3, 0.9, 0.1])
    assert moving_average(s, SmoothingConfig(0)) == s


def test_constant_stream_unchanged(make_stream):
    out = moving_average(make_stream([0.7, 0.7, 0.7]), SmoothingConfig(2))
    np.testing.assert_array_equal(out.probs, np.float32([0.7, 0.7, 0.7]))


def test_hand_computed_trailing_means(make_stream):
    out = moving_average(make_stream([0, 1, 1, 1]), SmoothingConfig(2))
    np.testing.assert_array_equal(out.probs, np.float32([0, 0.5, 1, 1]))


def test_from_seconds():
    assert SmoothingConfig.from_seconds(0.1).n_ma == 5
    assert [SmoothingConfig.from_seconds(t).n_ma for t in (0, 0.1, 0.2, 0.4, 0.8, 1)] == [0, 5, 10, 20, 40, 50]


def test_rejects_negative_window():
    with pytest.raises(ValueError):
        SmoothingConfig(-1)


@given(probs_lists, st.integers(0, 60))
def test_matches_naive_trailing_mean(values, n_ma):
    out = moving_average(ProbStream(values), n_ma).probs
    expected = np.float32(naive_sma(np.float32(values), n_ma))
    np.testing.assert_allclose(out, expected, rtol=0, atol=1e-6)


@given(probs_lists, st.integers(0, 60))
def test_bounded_and_length_preserving(values, n_ma):
    s = ProbStream(values)
    out = moving_average(s, n_ma).probs
    assert out.shape == s.probs.shape
    if len(s):
        assert out.min() >= s.probs.min() and out.max() <= s.probs.max()


@given(st.floats(0, 1, width=32), st.integers(1, 500), st.integers(0, 60))
def test_idempotent_on_constants(v, n, n_ma):
    s = ProbStream(np.full(n, v, dtype=np.float32))
    assert moving_average(s, n_ma) == s


@given(probs_lists)
def test_window_of_one_is_identity(values):
    s = ProbStream(values)
    assert moving_average(s, 1) == s
