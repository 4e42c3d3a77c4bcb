"""Arm-selection rules.

``LMA`` is the lazy-mirror-ascent tracking rule; the others are the usual
competitors for pure exploration (best challenger, direct tracking of the
plug-in optimal weights, top-two Thompson sampling, round-robin) and the
Frank-Wolfe step that several of them reduce to.  The functions here act on
an :class:`~mirrorbandit.core.AgentState` one step at a time; the episode
runner executes the same kernels in a compiled loop.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass
from typing import Optional, Union

import numpy as np

from . import _kernels as _k
from .ascent import AscentState, ascent_step, force_exploration
from .core import AgentState, ValidationError
from .problems import Family, NumericError, ProblemSpec, w_star


class Rule(enum.IntEnum):
    LMA = _k.LMA
    LMAC = _k.LMAC
    BEST_CHALLENGER = _k.BEST_CHALLENGER
    DIRECT_TRACKING = _k.DIRECT_TRACKING
    TTTS = _k.TTTS
    UNIFORM = _k.UNIFORM
    FRANK_WOLFE = _k.FRANK_WOLFE

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def parse(cls, name: Union[str, "Rule"]) -> "Rule":
        if isinstance(name, Rule):
            return name
        key = str(name).strip().lower().replace("-", "").replace("_", "")
        for rule, label in _LABELS.items():
            if key in (label.lower(), rule.name.lower().replace("_", "")):
                return rule
        raise ValidationError(f"unknown sampling rule {name!r}")


_LABELS = {
    Rule.LMA: "LMA",
    Rule.LMAC: "LMAc",
    Rule.BEST_CHALLENGER: "BC",
    Rule.DIRECT_TRACKING: "DT",
    Rule.TTTS: "TTTS",
    Rule.UNIFORM: "Unif",
    Rule.FRANK_WOLFE: "FW",
}

BEST_ARM_ONLY = (Rule.BEST_CHALLENGER, Rule.TTTS)


@dataclass(frozen=True)
class SamplerConfig:
    """Rule plus its parameters.

    ``c_eta=None`` means the learning-rate scale is set per instance to
    ``1 / gradient_bound(spec, mu)``.  ``explore_offset`` sets the forced
    exploration of BC and DT: an arm is pulled when ``N_a < sqrt(t) - offset*K``.
    """

    rule: Rule = Rule.LMA
    c_eta: Optional[float] = None
    gamma_scale: float = 0.25
    clip: float = math.inf
    explore_offset: float = 0.5
    ttts_cap: int = 10_000

    def __post_init__(self):
        object.__setattr__(self, "rule", Rule.parse(self.rule))
        if self.c_eta is not None and not self.c_eta > 0:
            raise ValidationError("c_eta must be positive")
        if self.gamma_scale < 0:
            raise ValidationError("gamma_scale must be nonnegative")
        if not self.clip > 0:
            raise ValidationError("clip must be positive (or inf)")
        if self.ttts_cap < 1:
            raise ValidationError("ttts_cap must be at least 1")

    @property
    def label(self) -> str:
        return self.rule.label

    def check_family(self, family: Family):
        if self.rule in BEST_ARM_ONLY and family != Family.BEST_ARM:
            raise ValidationError(f"{self.label} is defined for best-arm identification only")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rule"] = self.label
        d["clip"] = None if math.isinf(self.clip) else self.clip
        return d


def initialize(n_arms: int) -> list[int]:
    """Pull schedule of the initialisation phase: every arm once, in order."""
    if n_arms < 2:
        raise ValidationError("need at least two arms")
    return list(range(n_arms))


def track(cum_weights, counts) -> int:
    """Arm whose count lags most behind its cumulative target."""
    return int(_k.track_arm(np.asarray(cum_weights, dtype=float),
                            np.asarray(counts, dtype=float)))


def lma_select(state: AgentState, ascent: AscentState, spec: ProblemSpec,
               gamma_scale: float = 0.25) -> tuple[int, AscentState]:
    """One step of the lazy-mirror-ascent rule.

    The supergradient is taken at the ascent's current weights (not at the
    empirical proportions).  ``state.cum_weights`` is updated in place with
    the mixed weights; the advanced ascent state is returned with the arm.
    """
    if ascent.t != state.t:
        raise ValidationError(f"ascent is at step {ascent.t} but the agent at {state.t}")
    mu_hat = state.means
    grad = np.zeros(state.n_arms)
    _k.value_grad(int(spec.family), spec.thr, ascent.weights, mu_hat, grad)
    ascent, w_tilde = ascent_step(ascent, grad)
    w_prime = force_exploration(w_tilde, state.t, gamma_scale)
    state.cum_weights += w_prime
    return track(state.cum_weights, state.counts), ascent


def _forced(state: AgentState, offset: float) -> int:
    counts = state.counts.astype(float)
    a = int(_k.argmin_first(counts))
    if counts[a] < math.sqrt(state.t) - offset * state.n_arms:
        return a
    return -1


def best_challenger_select(state: AgentState, spec: ProblemSpec = None,
                           explore_offset: float = 0.5) -> int:
    if spec is not None and spec.family != Family.BEST_ARM:
        raise ValidationError("best challenger is defined for best-arm identification only")
    arm = _forced(state, explore_offset)
    if arm >= 0:
        return arm
    return int(_k.best_challenger_arm(state.counts.astype(float), state.means, state.t))


def direct_tracking_select(state: AgentState, spec: ProblemSpec,
                           explore_offset: float = 0.5) -> int:
    arm = _forced(state, explore_offset)
    if arm >= 0:
        return arm
    mu_hat = state.means
    if not _k.is_decided(int(spec.family), spec.thr, mu_hat):
        return uniform_select(state)
    try:
        target = w_star(spec, mu_hat)
    except NumericError as exc:
        raise NumericError(f"direct tracking at t={state.t}: {exc}") from exc
    return int(_k.argmax_first(target - state.counts / state.t))


def ttts_select(state: AgentState, rng, cap: int = 10_000, diagnostics=None) -> int:
    """Top-two Thompson sampling with N(0, 1) priors.

    ``diagnostics`` (length >= 5 float array) accumulates resample counts and
    cap hits when given.
    """
    diag = np.zeros(_k.N_DIAG) if diagnostics is None else diagnostics
    return int(_k.ttts_arm(state.counts.astype(float), state.sums, rng, cap, diag))


def posterior(state: AgentState) -> tuple[np.ndarray, np.ndarray]:
    """Posterior means and variances under independent N(0, 1) priors."""
    n = state.counts + 1.0
    return state.sums / n, 1.0 / n


def frank_wolfe_select(state: AgentState, spec: ProblemSpec) -> int:
    """Vertex maximising the supergradient at the empirical proportions.

    Evaluated at the raw counts (same choice, since ``F`` is 1-homogeneous);
    for thresholding this is ``argmin_a N_a d(mu_hat_a, threshold)``.
    """
    grad = np.zeros(state.n_arms)
    return int(_k.fw_arm(int(spec.family), spec.thr, state.counts.astype(float), state.means, grad))


def uniform_select(state: AgentState) -> int:
    return state.t % state.n_arms
