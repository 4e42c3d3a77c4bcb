"""Chernoff GLR stopping rule, its thresholds and the decision rule."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .core import AgentState, ValidationError
from .problems import Answer, Family, ProblemSpec, glr_statistic


class ThresholdKind(enum.IntEnum):
    PRACTICAL = _k.PRACTICAL
    THEORETICAL = _k.THEORETICAL

    @classmethod
    def parse(cls, name) -> "ThresholdKind":
        if isinstance(name, ThresholdKind):
            return name
        try:
            return cls[str(name).strip().upper()]
        except KeyError:
            raise ValidationError(f"unknown threshold kind {name!r}") from None


@dataclass(frozen=True)
class ThresholdSpec:
    """Stopping threshold.

    ``PRACTICAL`` is ``log((log t + 1) / delta)``.  ``THEORETICAL`` is the
    count-based threshold with the iterated-logarithm correction; its
    additive constant ``c_tilde`` defaults to 0, in which case the
    confidence guarantee is only empirical (see :func:`mixture_constant`
    for the value the deviation argument produces).
    """

    kind: ThresholdKind = ThresholdKind.PRACTICAL
    delta: float = 0.1
    c_tilde: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ThresholdKind.parse(self.kind))
        if not 0.0 < self.delta < 0.5:
            raise ValidationError(f"delta must lie in (0, 1/2), got {self.delta}")
        if not math.isfinite(self.c_tilde):
            raise ValidationError("c_tilde must be finite")

    def to_dict(self) -> dict:
        return {"kind": self.kind.name.lower(), "delta": self.delta, "c_tilde": self.c_tilde}


def threshold(tspec: ThresholdSpec, counts, t: int) -> float:
    if tspec.kind == ThresholdKind.PRACTICAL:
        if t < 1:
            raise ValidationError("the practical threshold needs t >= 1")
        return _k.practical_threshold(float(t), tspec.delta)
    counts = np.asarray(counts, dtype=float)
    if np.any(counts < 1):
        raise ValidationError("the theoretical threshold needs every arm pulled")
    return _k.theoretical_threshold(counts, tspec.delta, tspec.c_tilde)


def should_stop(spec: ProblemSpec, tspec: ThresholdSpec, state: AgentState) -> bool:
    glr = glr_statistic(spec, state.counts, state.means)
    return glr >= threshold(tspec, state.counts, state.t)


def decide(spec: ProblemSpec, state: AgentState) -> Answer:
    """Class closest to the empirical means in count-weighted divergence.

    For thresholding and best arm the empirical means always lie in the
    closure of some class (distance 0): arms on the threshold count as
    below it, tied leaders resolve to the smallest index.  For the signed
    family the two projection costs are compared, ties going to ``'+'``.
    """
    return decide_from(spec, state.counts, state.means)


def decide_from(spec: ProblemSpec, counts, mu_hat) -> Answer:
    mu_hat = np.asarray(mu_hat, dtype=float)
    if spec.family == Family.THRESHOLDING:
        return frozenset(int(a) for a in np.flatnonzero(mu_hat > spec.threshold))
    if spec.family == Family.BEST_ARM:
        return int(_k.argmax_first(mu_hat))
    cost_plus, cost_minus = _k.signed_costs(np.asarray(counts, dtype=float), mu_hat, spec.threshold)
    return "+" if cost_plus <= cost_minus else "-"


def prior_normalizer(beta: float = 0.5) -> float:
    """Normalising constant of the density ``1 / (|x| (|log|x|| + 2)^(1+beta))``."""
    if beta <= 0:
        raise ValidationError("beta must be positive")
    return beta * 2.0 ** beta / 4.0


def mixture_constant() -> float:
    """Per-arm additive constant of the count-based threshold (``beta = 1/2``).

    ``log C = 1 - 2 log C_{1/2}`` and the constant is ``5 log(2 C)``.
    """
    log_c = 1.0 - 2.0 * math.log(prior_normalizer(0.5))
    return 5.0 * (math.log(2.0) + log_c)
