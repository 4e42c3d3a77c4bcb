import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mirrorbandit import (AgentState, GaussianBandit, RngStream, ValidationError, check_simplex,
                          kl_categorical, kl_gaussian, sample_arm, update_state)

finite = st.floats(-50, 50, allow_nan=False)


def test_sample_arm_zero_noise(zero_rng):
    bandit = GaussianBandit([0.0, 5.0])
    assert sample_arm(bandit, 0, zero_rng) == 0.0
    assert sample_arm(bandit, 1, zero_rng) == 5.0


def test_sample_arm_mean_concentrates():
    bandit = GaussianBandit([1.0, 0.0])
    rng = RngStream(3).generator()
    xs = [sample_arm(bandit, 0, rng) for _ in range(100_000)]
    assert abs(np.mean(xs) - 1.0) < 0.02


def test_sample_arm_rejects_bad_index(zero_rng):
    with pytest.raises(IndexError):
        sample_arm(GaussianBandit([0.0, 1.0]), 2, zero_rng)


@pytest.mark.parametrize("means", [[1.0], [0.0, math.nan], [[0.0, 1.0]], [0.0, math.inf]])
def test_bandit_validation(means):
    with pytest.raises(ValidationError):
        GaussianBandit(means)


def test_bandit_is_immutable():
    b = GaussianBandit([0.0, 1.0])
    assert b.n_arms == 2 and b.variance == 1.0
    with pytest.raises(ValueError):
        b.means[0] = 3.0


@pytest.mark.parametrize("x,y,expected", [(0, 0, 0.0), (0, 2, 2.0), (1, 0.85, 0.01125)])
def test_kl_gaussian_values(x, y, expected):
    assert kl_gaussian(x, y) == pytest.approx(expected, abs=1e-12)


@given(finite, finite)
def test_kl_gaussian_symmetric_nonnegative(x, y):
    assert kl_gaussian(x, y) == kl_gaussian(y, x) >= 0


def test_kl_categorical_values():
    assert kl_categorical([0.5, 0.5], [0.5, 0.5]) == 0.0
    assert kl_categorical([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2))
    assert kl_categorical([0.5, 0.5], [1.0, 0.0]) == math.inf


@given(st.lists(st.floats(0.01, 1), min_size=2, max_size=6))
def test_kl_categorical_nonnegative(raw):
    w = np.array(raw) / sum(raw)
    v = np.full(len(raw), 1 / len(raw))
    assert kl_categorical(w, v) >= -1e-12


def test_kl_categorical_rejects_non_simplex():
    with pytest.raises(ValidationError):
        kl_categorical([0.6, 0.6], [0.5, 0.5])
    with pytest.raises(ValidationError):
        check_simplex([1.2, -0.2])


def test_update_state_single():
    s = update_state(AgentState.empty(2), 1, 2.0)
    assert s.counts.tolist() == [0, 1] and s.sums.tolist() == [0.0, 2.0] and s.t == 1


def test_update_state_mean_and_counting():
    s = AgentState.empty(2)
    s = update_state(update_state(s, 0, 1.0), 0, 3.0)
    s = update_state(s, 1, 0.0)
    assert s.means[0] == 2.0
    init = AgentState.empty(4)
    for a in range(4):
        init = update_state(init, a, 0.0)
    assert init.counts.sum() == 4 == init.t


def test_update_state_is_pure():
    s = AgentState.empty(2)
    update_state(s, 0, 1.0)
    assert s.t == 0 and s.counts.sum() == 0


def test_means_need_all_arms():
    with pytest.raises(ValidationError):
        AgentState.empty(3).means


def test_rng_streams_independent_and_reproducible():
    a = RngStream(7, 0).generator().standard_normal(5)
    b = RngStream(7, 0).generator().standard_normal(5)
    c = RngStream(7, 1).generator().standard_normal(5)
    assert np.array_equal(a, b) and not np.array_equal(a, c)
