import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from augmc.diagnostics import (
    MODE1,
    MODE2,
    TraceStore,
    count_mode_jumps,
    hamming_lag_stats,
    log_posterior_summary,
    mode_label,
    mode_labels,
)
from augmc.targets import ToyBlockTarget


def make_trace(states, log_post=None):
    states = np.asarray(states, dtype=np.int8)
    n = len(states)
    lp = np.zeros((n, 1)) if log_post is None else np.asarray(log_post, float).reshape(n, 1)
    its = np.arange(n)
    return TraceStore(its, np.array([1.0]), lp, its, states)


def test_mode_label_examples():
    four = ToyBlockTarget.equal(4, [0.1])
    assert mode_label([1, 1, 0, 0], four).tolist() == [MODE2]
    assert mode_label([1, 1, 0, 0], four, previous=[MODE1]).tolist() == [MODE1]
    assert mode_label([1, 1, 1, 0], four).tolist() == [MODE1]
    two = ToyBlockTarget.equal(6, [0.1, 0.1])
    assert mode_label([1, 1, 1, 0, 0, 0], two).tolist() == [MODE1, MODE2]


def test_mode_labels_carry_ties():
    target = ToyBlockTarget.equal(4, [0.1])
    labels = mode_labels([[1, 1, 1, 0], [1, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 1]], target)
    assert labels[:, 0].tolist() == [MODE1, MODE1, MODE2, MODE2]


def test_jump_examples():
    target = ToyBlockTarget.equal(6, [0.1, 0.2])
    const = make_trace([[1, 1, 1, 0, 0, 0]] * 5)
    assert count_mode_jumps(const, target).cumulative_jumps.tolist() == [0] * 5
    a, b = [1, 1, 1, 0, 0, 0], [0, 0, 0, 1, 1, 1]
    alt = count_mode_jumps(make_trace([a, b] * 4), target)
    assert alt.cumulative_jumps[-1] == 7
    assert alt.distinct_labels == 2 and alt.distinct_exact_modes == 2


def test_exact_and_nearest_counters_differ():
    target = ToyBlockTarget.equal(6, [0.1, 0.2])
    s = count_mode_jumps(make_trace([[1, 1, 0, 0, 0, 0], [0, 0, 0, 1, 1, 1]]), target)
    assert s.distinct_labels == 2 and s.distinct_exact_modes == 1


@given(arrays(np.int8, st.tuples(st.integers(1, 40), st.just(8)), elements=st.integers(0, 1)))
def test_jump_invariants(states):
    target = ToyBlockTarget.equal(8, [0.1, 0.2])
    s = count_mode_jumps(make_trace(states), target)
    assert np.all(np.diff(s.cumulative_jumps) >= 0)
    assert s.distinct_labels <= min(len(states), 4)
    assert s.distinct_exact_modes <= s.distinct_labels


def test_hamming_lag_examples():
    const = make_trace([np.zeros((2, 3))] * 6)
    assert all(np.all(v == 0) for v in hamming_lag_stats(const, [1, 2]).values())
    comp = make_trace([np.zeros((2, 3)), np.ones((2, 3))])
    assert hamming_lag_stats(comp, [1])[1].tolist() == [1.0]


def test_hamming_lag_with_thinning_and_start():
    states = np.zeros((6, 1, 4), np.int8)
    states[3:, 0, :2] = 1
    its = np.arange(0, 12, 2)
    trace = TraceStore(np.arange(12), np.array([1.0]), np.zeros((12, 1)), its, states)
    out = hamming_lag_stats(trace, [1, 2, 4], start_iteration=2, with_iterations=True)
    assert out[1][1].size == 0
    starts, values = out[4]
    assert starts.tolist() == [2, 4, 6]
    assert values.tolist() == [0.5, 0.5, 0.0]
    with pytest.raises(ValueError):
        hamming_lag_stats(trace, [0])


@given(arrays(np.int8, st.tuples(st.integers(2, 30), st.just(2), st.just(5)), elements=st.integers(0, 1)))
def test_hamming_values_in_unit_interval(states):
    out = hamming_lag_stats(make_trace(states), [1, 10, 50])
    for v in out.values():
        assert np.all((v >= 0) & (v <= 1))
    assert len(out[1]) == len(states) - 1


def test_log_posterior_summary():
    lp = [-5.0, -3.0, -4.0, -1.0]
    series, running = log_posterior_summary(make_trace(np.zeros((4, 2)), lp))[0]
    assert series.tolist() == lp and running.tolist() == [-5.0, -3.0, -3.0, -1.0]
    mono = [-4.0, -3.0, -2.0]
    s, r = log_posterior_summary(make_trace(np.zeros((3, 2)), mono))[0]
    assert np.array_equal(s, r)


def test_diagnostics_are_pure():
    target = ToyBlockTarget.equal(6, [0.1, 0.2])
    rng = np.random.default_rng(0)
    trace = make_trace(rng.integers(0, 2, size=(50, 6)))
    before = trace.states.copy()
    a, b = count_mode_jumps(trace, target), count_mode_jumps(trace, target)
    assert np.array_equal(a.cumulative_jumps, b.cumulative_jumps)
    assert np.array_equal(trace.states, before)


def test_trace_validation():
    with pytest.raises(ValueError):
        TraceStore(np.array([0, 0]), np.array([1.0]), np.zeros((2, 1)), np.array([0]), np.zeros((1, 2)))
    with pytest.raises(ValueError):
        TraceStore(np.arange(3), np.array([1.0]), np.zeros((2, 1)), np.array([0]), np.zeros((1, 2)))
    with pytest.raises(ValueError):
        TraceStore(np.arange(2), np.array([1.0]), np.zeros((2, 1)), np.array([0, 1]), np.zeros((1, 2)))
