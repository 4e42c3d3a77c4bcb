"""Gaussian environments, reproducible random streams and running statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SIMPLEX_TOL = 1e-9


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


def check_simplex(w, name="w", tol=SIMPLEX_TOL):
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or not np.all(np.isfinite(w)):
        raise ValidationError(f"{name} must be a finite 1-d vector")
    if w.min() < -tol or abs(w.sum() - 1.0) > tol:
        raise ValidationError(f"{name} is not on the simplex (min={w.min()}, sum={w.sum()})")
    return w


@dataclass(frozen=True)
class GaussianBandit:
    """K unit-variance Gaussian arms, identified by their means."""

    means: np.ndarray

    def __post_init__(self):
        means = np.array(self.means, dtype=float)
        if means.ndim != 1 or means.shape[0] < 2:
            raise ValidationError("a bandit needs at least two arms")
        if not np.all(np.isfinite(means)):
            raise ValidationError("arm means must be finite")
        means.setflags(write=False)
        object.__setattr__(self, "means", means)

    @property
    def n_arms(self) -> int:
        return self.means.shape[0]

    @property
    def variance(self) -> float:
        return 1.0


@dataclass(frozen=True)
class RngStream:
    """Independent random stream keyed by ``(seed, stream)``.

    Streams are derived with ``SeedSequence(seed, spawn_key=(stream,))`` and
    drive a PCG64 generator, so episode ``e`` of a benchmark gets the same
    draws no matter which worker runs it.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(ss))


def sample_arm(bandit: GaussianBandit, arm: int, rng) -> float:
    """One reward ``mu_arm + N(0, 1)``; ``rng`` needs ``standard_normal()``."""
    if not 0 <= arm < bandit.n_arms:
        raise IndexError(f"arm {arm} out of range for {bandit.n_arms} arms")
    return float(bandit.means[arm] + rng.standard_normal())


def kl_gaussian(x: float, y: float) -> float:
    """KL divergence between N(x, 1) and N(y, 1)."""
    return 0.5 * (x - y) ** 2


def kl_categorical(w, v) -> float:
    w = check_simplex(w, "w")
    v = check_simplex(v, "v")
    if w.shape != v.shape:
        raise ValidationError("w and v must have the same length")
    support = w > 0
    if np.any(v[support] <= 0):
        return np.inf
    return float(np.sum(w[support] * np.log(w[support] / v[support])))


@dataclass
class AgentState:
    """Per-episode sufficient statistics.

    ``cum_weights`` holds the running sum of proposed sampling weights used
    by tracking rules; rules that do not propose weights leave it at zero.
    """

    counts: np.ndarray
    sums: np.ndarray
    cum_weights: np.ndarray
    t: int = 0

    @classmethod
    def empty(cls, n_arms: int) -> "AgentState":
        return cls(np.zeros(n_arms, dtype=np.int64), np.zeros(n_arms), np.zeros(n_arms), 0)

    @property
    def n_arms(self) -> int:
        return self.counts.shape[0]

    @property
    def means(self) -> np.ndarray:
        if np.any(self.counts < 1):
            raise ValidationError("empirical means need every arm pulled at least once")
        return self.sums / self.counts

    @property
    def proportions(self) -> np.ndarray:
        return self.counts / self.t

    def copy(self) -> "AgentState":
        return AgentState(self.counts.copy(), self.sums.copy(), self.cum_weights.copy(), self.t)


def update_state(state: AgentState, arm: int, reward: float) -> AgentState:
    """Return a new state with one more observation of ``arm``."""
    if not 0 <= arm < state.n_arms:
        raise IndexError(f"arm {arm} out of range for {state.n_arms} arms")
    new = state.copy()
    new.counts[arm] += 1
    new.sums[arm] += reward
    new.t += 1
    return new
