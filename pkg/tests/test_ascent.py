import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mirrorbandit import (AscentState, ValidationError, ascent_step, clip_gradient, exp_weights,
                          force_exploration)


def test_clip_gradient_examples():
    assert clip_gradient([0.5, 2], 4).tolist() == [0.5, 2]
    assert clip_gradient([0.5, 2], 1, 1.0).tolist() == [0.5, 1.0]
    assert clip_gradient([0, 0], 9, 0.1).tolist() == [0, 0]
    with pytest.raises(ValidationError):
        clip_gradient([-1.0, 0.0], 1)


def test_exp_weights_examples():
    assert exp_weights([0, 0, 0], 3.0) == pytest.approx([1 / 3] * 3)
    assert exp_weights([math.log(2), 0], 1.0) == pytest.approx([2 / 3, 1 / 3])
    assert exp_weights([500 + math.log(2), 500], 1.0) == pytest.approx([2 / 3, 1 / 3])
    with pytest.raises(ValidationError):
        exp_weights([0, 0], 0.0)


@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=8), st.floats(1e-3, 10))
def test_exp_weights_on_simplex(G, eta):
    w = exp_weights(G, eta)
    assert abs(w.sum() - 1) < 1e-12 and np.all(w >= 0)


def test_ascent_step_examples():
    s = AscentState.start(2)
    s, w = ascent_step(s, [0, 0])
    assert w == pytest.approx([0.5, 0.5]) and s.t == 2
    s, _ = ascent_step(s, [1, 0])
    s, w = ascent_step(s, [1, 0])
    assert w[0] > w[1]
    assert s.G.tolist() == [2.0, 0.0]


def test_ascent_constant_gain_concentrates():
    s = AscentState.start(2)
    for _ in range(10_000):
        s, w = ascent_step(s, [1, 0])
    assert w[0] > 1 - 1e-12


def test_ascent_rate_schedule():
    s = AscentState.start(3, t=4, c_eta=2.0)
    assert s.eta() == pytest.approx(1.0)
    assert AscentState.start(3, t=4, c_eta=2.0, constant_rate=True).eta() == 2.0
    with pytest.raises(ValidationError):
        AscentState.start(3, t=0)


def test_ascent_G_nondecreasing():
    rng = np.random.default_rng(0)
    s = AscentState.start(4, clip=0.3)
    prev = s.G
    for _ in range(200):
        s, _ = ascent_step(s, rng.random(4))
        assert np.all(s.G >= prev)
        prev = s.G


def test_force_exploration_examples():
    assert force_exploration([0.5, 0.5], 7) == pytest.approx([0.5, 0.5])
    assert force_exploration([1.0, 0.0], 1) == pytest.approx([0.875, 0.125])
    assert force_exploration([1.0, 0.0], 4, 0.5) == pytest.approx([0.875, 0.125])


@given(st.lists(st.floats(0, 1), min_size=2, max_size=6), st.integers(1, 10**6))
def test_force_exploration_lower_bound(raw, t):
    w = np.array(raw) + 1e-9
    w /= w.sum()
    out = force_exploration(w, t)
    K = len(w)
    assert np.all(out >= 1 / (4 * K * math.sqrt(t)) - 1e-15)
    assert abs(out.sum() - 1) < 1e-12


def test_force_exploration_clamps_with_warning():
    with pytest.warns(UserWarning):
        out = force_exploration([1.0, 0.0], 1, gamma_scale=4.0)
    assert out == pytest.approx([0.5, 0.5])
