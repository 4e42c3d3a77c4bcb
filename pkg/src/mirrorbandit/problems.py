"""Partition-identification families: thresholding, best arm and signed.

For each family this module gives the correct answer of an instance, the
value function ``F(w, mu)`` (the cheapest weighted move of ``mu`` into an
alternative), a supergradient of ``F(., mu)``, the GLR stopping statistic,
the characteristic time and the optimal sampling proportions.

Arms are indexed from 0.  An instance on the boundary of its class (a mean
equal to the threshold, tied best arms, or mixed signs for the signed
family) is *undecided*; there the alternative set is the whole partition,
so ``F`` is the distance to the nearest class.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import _kernels as _k
from .core import ValidationError, check_simplex


class Family(enum.IntEnum):
    THRESHOLDING = _k.THRESHOLDING
    BEST_ARM = _k.BEST_ARM
    SIGNED = _k.SIGNED

    @classmethod
    def parse(cls, name: Union[str, "Family"]) -> "Family":
        if isinstance(name, Family):
            return name
        key = str(name).strip().lower().replace("-", "_")
        aliases = {
            "thresholding": cls.THRESHOLDING, "threshold": cls.THRESHOLDING,
            "best_arm": cls.BEST_ARM, "bestarm": cls.BEST_ARM, "bai": cls.BEST_ARM,
            "signed": cls.SIGNED,
        }
        if key not in aliases:
            raise ValidationError(f"unknown problem family {name!r}")
        return aliases[key]


class UndefinedInstanceError(ValueError):
    """The instance lies outside every class of the partition."""


class NumericError(RuntimeError):
    """An iterative solver failed to converge."""


@dataclass(frozen=True)
class ProblemSpec:
    family: Family
    threshold: Optional[float] = None

    def __post_init__(self):
        family = Family.parse(self.family)
        object.__setattr__(self, "family", family)
        if family == Family.BEST_ARM:
            if self.threshold is not None:
                raise ValidationError("best-arm identification takes no threshold")
        else:
            if self.threshold is None or not np.isfinite(self.threshold):
                raise ValidationError(f"{family.name.lower()} needs a finite threshold")
            object.__setattr__(self, "threshold", float(self.threshold))

    @property
    def thr(self) -> float:
        """Threshold as passed to kernels (0.0 when unused)."""
        return 0.0 if self.threshold is None else self.threshold

    @classmethod
    def thresholding(cls, threshold: float) -> "ProblemSpec":
        return cls(Family.THRESHOLDING, threshold)

    @classmethod
    def best_arm(cls) -> "ProblemSpec":
        return cls(Family.BEST_ARM)

    @classmethod
    def signed(cls, threshold: float) -> "ProblemSpec":
        return cls(Family.SIGNED, threshold)

    def to_dict(self) -> dict:
        return {"family": self.family.name.lower(), "threshold": self.threshold}


Answer = Union[frozenset, int, str]


def _means(mu) -> np.ndarray:
    mu = np.asarray(mu, dtype=float)
    if mu.ndim != 1 or mu.shape[0] < 2 or not np.all(np.isfinite(mu)):
        raise ValidationError("means must be a finite vector with at least two arms")
    return mu


def is_decided(spec: ProblemSpec, mu) -> bool:
    return bool(_k.is_decided(int(spec.family), spec.thr, _means(mu)))


def answer(spec: ProblemSpec, mu) -> Optional[Answer]:
    """Class of ``mu``, or ``None`` when undecided.

    Thresholding answers are frozensets of arms strictly above the
    threshold, best-arm answers an arm index, signed answers ``'+'``/``'-'``.
    """
    mu = _means(mu)
    if not _k.is_decided(int(spec.family), spec.thr, mu):
        return None
    if spec.family == Family.THRESHOLDING:
        return frozenset(int(a) for a in np.flatnonzero(mu > spec.threshold))
    if spec.family == Family.BEST_ARM:
        return int(_k.argmax_first(mu))
    return "+" if mu[0] > spec.threshold else "-"


def _value_grad(spec, w, mu):
    grad = np.zeros(mu.shape[0])
    value = _k.value_grad(int(spec.family), spec.thr, w, mu, grad)
    return float(value), grad


def value_f(spec: ProblemSpec, w, mu) -> float:
    mu = _means(mu)
    w = check_simplex(w)
    if w.shape != mu.shape:
        raise ValidationError("w and mu must have the same length")
    return _value_grad(spec, w, mu)[0]


def subgradient(spec: ProblemSpec, w, mu) -> np.ndarray:
    """One supergradient of the concave map ``w -> F(w, mu)``.

    Active pieces tie-break to the smallest arm index; for the signed family
    off the partition, equal projection costs select the S+ branch.
    """
    mu = _means(mu)
    w = check_simplex(w)
    if w.shape != mu.shape:
        raise ValidationError("w and mu must have the same length")
    if np.any(w <= 0):
        raise ValidationError("sub-gradients are only taken at strictly positive weights")
    return _value_grad(spec, w, mu)[1]


def glr_statistic(spec: ProblemSpec, counts, mu_hat) -> float:
    """``inf over alternatives of sum_a N_a d(mu_hat_a, lambda_a)``."""
    mu_hat = _means(mu_hat)
    counts = np.asarray(counts, dtype=float)
    if counts.shape != mu_hat.shape:
        raise ValidationError("counts and means must have the same length")
    if np.any(counts < 1):
        raise ValidationError("the GLR statistic needs every arm pulled at least once")
    return _value_grad(spec, counts, mu_hat)[0]


def w_star(spec: ProblemSpec, mu, tol: float = 1e-8, max_iter: int = 200) -> np.ndarray:
    """Optimal sampling proportions ``argmax_w F(w, mu)``.

    Closed forms for thresholding (inverse divergences) and signed (uniform
    over the arms farthest from the threshold).  Best arm uses bisection on
    the scalar equation characterising the optimum; ``tol`` is relative to
    the smallest gap divergence.
    """
    mu = _means(mu)
    if not _k.is_decided(int(spec.family), spec.thr, mu):
        raise UndefinedInstanceError("optimal weights are undefined off the partition")
    out = np.zeros(mu.shape[0])
    status = _k.w_star_into(int(spec.family), spec.thr, mu, tol, max_iter, out)
    if status < 0:
        raise NumericError(f"bisection did not reach tol={tol} in {max_iter} iterations")
    return out


def characteristic_time(spec: ProblemSpec, mu) -> float:
    mu = _means(mu)
    if not _k.is_decided(int(spec.family), spec.thr, mu):
        raise UndefinedInstanceError("characteristic time is undefined off the partition")
    if spec.family == Family.THRESHOLDING:
        return float(np.sum(1.0 / (0.5 * (mu - spec.threshold) ** 2)))
    if spec.family == Family.SIGNED:
        return float(1.0 / np.max(0.5 * (mu - spec.threshold) ** 2))
    return 1.0 / value_f(spec, w_star(spec, mu), mu)


def gradient_bound(spec: ProblemSpec, mu, radius: float = 0.0) -> float:
    """Upper bound on every supergradient entry for means within ``radius``.

    Conservative: for thresholding and signed it is the largest divergence
    to the threshold over the sup-norm ball; for best arm it is the
    divergence between the extreme means of the ball.
    """
    mu = _means(mu)
    if radius < 0:
        raise ValidationError("radius must be nonnegative")
    if spec.family == Family.BEST_ARM:
        return 0.5 * (mu.max() - mu.min() + 2.0 * radius) ** 2
    return float(0.5 * np.max(np.abs(mu - spec.threshold) + radius) ** 2)
