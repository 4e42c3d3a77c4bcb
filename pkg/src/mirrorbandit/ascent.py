"""Anytime lazy mirror ascent on the simplex (exponential weights).

Only the cumulative clipped gradient ``G`` is stored; the current weights are
always ``softmax(eta_t * G)`` with ``eta_t = c_eta / sqrt(t)`` (or the
constant ``c_eta`` for the constant-rate variant).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels as _k
from .core import ValidationError, check_simplex


@dataclass(frozen=True)
class AscentState:
    """Cumulative gradient ``G`` after the gains of steps ``1..t-1``.

    ``t`` indexes the weights currently being played, so a fresh learner
    sits at ``t = 1`` with uniform weights.  Inside a bandit episode the
    ascent starts at ``t = K`` once every arm has been pulled.
    """

    G: np.ndarray
    t: int = 1
    c_eta: float = 1.0
    clip: float = math.inf
    constant_rate: bool = False

    def __post_init__(self):
        if self.c_eta <= 0:
            raise ValidationError("learning-rate scale must be positive")
        if not self.clip > 0:
            raise ValidationError("clip constant must be positive (or inf)")
        if self.t < 1:
            raise ValidationError("ascent step index starts at 1")

    @classmethod
    def start(cls, n_arms: int, t: int = 1, **kwargs) -> "AscentState":
        return cls(np.zeros(n_arms), t, **kwargs)

    def eta(self, t=None) -> float:
        if self.constant_rate:
            return self.c_eta
        return self.c_eta / math.sqrt(self.t if t is None else t)

    @property
    def weights(self) -> np.ndarray:
        return exp_weights(self.G, self.eta())


def clip_gradient(g, t: int, M: float = math.inf) -> np.ndarray:
    """Component-wise ``min(g_a, M sqrt(t))``."""
    g = np.asarray(g, dtype=float)
    if np.any(g < 0):
        raise ValidationError("gradients must be nonnegative")
    return np.minimum(g, M * math.sqrt(t))


def exp_weights(G, eta: float) -> np.ndarray:
    """``w_a = exp(eta G_a) / sum_b exp(eta G_b)``, computed with max-shift."""
    if eta <= 0:
        raise ValidationError("eta must be positive")
    G = np.asarray(G, dtype=float)
    out = np.empty(G.shape[0])
    _k.softmax_into(G, float(eta), out)
    return out


def ascent_step(state: AscentState, g) -> tuple[AscentState, np.ndarray]:
    """Add the clipped gain of step ``t``; return the state and weights at ``t+1``."""
    G = state.G + clip_gradient(g, state.t, state.clip)
    new = replace(state, G=G, t=state.t + 1)
    return new, new.weights


def force_exploration(w_tilde, t: int, gamma_scale: float = 0.25) -> np.ndarray:
    """Mix toward uniform: ``(1 - gamma_t) w + gamma_t / K`` with ``gamma_t = scale/sqrt(t)``."""
    w_tilde = check_simplex(w_tilde, "w_tilde")
    if gamma_scale < 0:
        raise ValidationError("gamma_scale must be nonnegative")
    gamma = gamma_scale / math.sqrt(t)
    if gamma > 1.0:
        warnings.warn(f"exploration rate {gamma:.3g} > 1 at t={t}; clamped to 1", stacklevel=2)
        gamma = 1.0
    K = w_tilde.shape[0]
    return (1.0 - gamma) * w_tilde + gamma / K
