"""Brute-force references for the closed-form routines.

These are deliberately naive: an exhaustive grid over the simplex for the
optimal weights, an exhaustive grid over alternative means for the GLR
statistic (two arms), and finite differences for supergradients.  They
ship with the library so results can be checked from the command line.
"""

from __future__ import annotations

import itertools

import numpy as np

from .core import ValidationError, check_simplex
from .problems import Family, ProblemSpec, gradient_bound, subgradient, value_f

MAX_GRID_POINTS = 5_000_000


class UnsupportedError(ValueError):
    """The oracle does not handle this input size."""


def simplex_grid(n_arms: int, n: int) -> np.ndarray:
    """Integer compositions of ``n`` into ``n_arms`` parts (divide by ``n`` for the grid).

    Stars and bars: each choice of ``n_arms - 1`` bar positions among
    ``n + n_arms - 1`` slots gives one composition.
    """
    slots = n + n_arms - 1
    bars = np.fromiter(itertools.chain.from_iterable(
        itertools.combinations(range(slots), n_arms - 1)), dtype=np.int64)
    bars = bars.reshape(-1, n_arms - 1)
    edges = np.column_stack([np.full(len(bars), -1), bars, np.full(len(bars), slots)])
    return np.diff(edges, axis=1) - 1


def batch_value(spec: ProblemSpec, W: np.ndarray, mu) -> np.ndarray:
    """``F(w, mu)`` for every row of ``W``, written directly from the definitions."""
    mu = np.asarray(mu, dtype=float)
    W = np.asarray(W, dtype=float)
    if spec.family == Family.THRESHOLDING:
        return np.min(W * 0.5 * (mu - spec.threshold) ** 2, axis=1)
    if spec.family == Family.SIGNED:
        d = 0.5 * (mu - spec.threshold) ** 2
        plus = W[:, mu < spec.threshold] @ d[mu < spec.threshold]
        minus = W[:, mu > spec.threshold] @ d[mu > spec.threshold]
        if np.all(mu > spec.threshold):
            return minus
        if np.all(mu < spec.threshold):
            return plus
        return np.minimum(plus, minus)
    i = int(np.argmax(mu))
    costs = []
    for a in range(mu.shape[0]):
        if a == i:
            continue
        wi, wa = W[:, i], W[:, a]
        # two-arm cost wi*wa/(wi+wa) * (mu_i - mu_a)^2 / 2, zero if both weights vanish
        s = wi + wa
        with np.errstate(invalid="ignore", divide="ignore"):
            c = np.where(s > 0, wi * wa / s, 0.0) * 0.5 * (mu[i] - mu[a]) ** 2
        costs.append(c)
    return np.min(np.column_stack(costs), axis=1)


def grid_w_star(spec: ProblemSpec, mu, step: float = 0.01) -> np.ndarray:
    """Best point of a regular simplex grid for ``F(., mu)``."""
    mu = np.asarray(mu, dtype=float)
    K = mu.shape[0]
    if K > 4:
        raise UnsupportedError("grid search is limited to K <= 4")
    n = int(round(1.0 / step))
    if abs(n * step - 1.0) > 1e-9:
        raise ValidationError("1/step must be an integer")
    n_points = int(np.prod([n + j for j in range(1, K)]) // np.prod(range(1, K)))
    if n_points > MAX_GRID_POINTS:
        raise UnsupportedError(f"grid would have {n_points} points (limit {MAX_GRID_POINTS})")
    W = simplex_grid(K, n) / n
    values = batch_value(spec, W, mu)
    return W[int(np.argmax(values))]


def _classes(spec: ProblemSpec, L1, L2):
    """Class labels of alternatives on a 2-arm grid; -1 marks points outside S."""
    if spec.family == Family.THRESHOLDING:
        T = spec.threshold
        label = (L1 > T).astype(np.int64) + 2 * (L2 > T).astype(np.int64)
        return np.where((L1 == T) | (L2 == T), -1, label)
    if spec.family == Family.BEST_ARM:
        return np.where(L1 > L2, 0, np.where(L2 > L1, 1, -1))
    T = spec.threshold
    return np.where((L1 > T) & (L2 > T), 0, np.where((L1 < T) & (L2 < T), 1, -1))


def grid_glr(spec: ProblemSpec, counts, mu_hat, lambda_step: float = 1e-3, box=None) -> float:
    """Minimum of ``sum_a N_a d(mu_hat_a, lambda_a)`` over grid alternatives.

    ``box`` is an interval ``(lo, hi)`` applied to both coordinates; by
    default it covers the means and the threshold with a 0.05 margin.  The
    result upper-bounds the true infimum; see :func:`grid_glr_error_bound`.
    """
    counts = np.asarray(counts, dtype=float)
    mu_hat = np.asarray(mu_hat, dtype=float)
    if mu_hat.shape[0] != 2:
        raise UnsupportedError("the GLR grid oracle handles two arms only")
    lo, hi = default_box(spec, mu_hat) if box is None else box
    axis = lo + lambda_step * np.arange(int(np.floor((hi - lo) / lambda_step)) + 1)
    L1, L2 = np.meshgrid(axis, axis, indexing="ij")
    lab = _classes(spec, L1, L2)
    own = _classes(spec, mu_hat[:1].reshape(1, 1), mu_hat[1:].reshape(1, 1))[0, 0]
    alt = lab >= 0 if own < 0 else (lab >= 0) & (lab != own)
    if not alt.any():
        raise ValidationError("box contains no alternative")
    obj = (counts[0] * 0.5 * (axis - mu_hat[0]) ** 2)[:, None] \
        + (counts[1] * 0.5 * (axis - mu_hat[1]) ** 2)[None, :]
    return float(np.min(obj[alt]))


def default_box(spec: ProblemSpec, mu_hat, margin: float = 0.05):
    pts = list(mu_hat) + ([] if spec.threshold is None else [spec.threshold])
    return min(pts) - margin, max(pts) + margin


def grid_glr_error_bound(counts, mu_hat, lambda_step: float, box) -> float:
    """Worst-case excess of :func:`grid_glr` over the true infimum.

    Some grid alternative lies within one step of the minimiser in every
    coordinate, and the quadratic moves by at most
    ``N_a * step * (|lambda_a - mu_a| + step / 2)`` per coordinate.
    """
    counts = np.asarray(counts, dtype=float)
    mu_hat = np.asarray(mu_hat, dtype=float)
    lo, hi = box
    reach = np.maximum(np.abs(lo - mu_hat), np.abs(hi - mu_hat))
    return float(np.sum(counts * lambda_step * (reach + lambda_step / 2)))


def _pieces(spec: ProblemSpec, w, mu) -> np.ndarray:
    """Values of the smooth pieces whose minimum is ``F(w, mu)``."""
    mu = np.asarray(mu, dtype=float)
    if spec.family == Family.THRESHOLDING:
        return w * 0.5 * (mu - spec.threshold) ** 2
    if spec.family == Family.SIGNED:
        d = 0.5 * (mu - spec.threshold) ** 2
        plus = float(w[mu < spec.threshold] @ d[mu < spec.threshold])
        minus = float(w[mu > spec.threshold] @ d[mu > spec.threshold])
        if np.all(mu > spec.threshold):
            return np.array([minus])
        if np.all(mu < spec.threshold):
            return np.array([plus])
        return np.array([plus, minus])
    i = int(np.argmax(mu))
    return np.array([w[i] * w[a] / (w[i] + w[a]) * 0.5 * (mu[i] - mu[a]) ** 2
                     for a in range(len(mu)) if a != i])


def finite_diff_check(spec: ProblemSpec, w, mu, h: float = 1e-4) -> float:
    """Largest disagreement between ``subgradient`` and finite differences.

    Directions are ``e_a - e_b``.  Where a single piece is active on the
    whole segment ``w +- h d`` the central difference is compared to
    ``g . d``; otherwise only the supergradient inequality is checked and
    its violation (if any) is reported.
    """
    w = check_simplex(w)
    mu = np.asarray(mu, dtype=float)
    if not 1e-6 <= h <= 1e-3:
        raise ValidationError("h must lie in [1e-6, 1e-3]")
    if w.min() <= h:
        raise ValidationError("w must be at least h away from the simplex boundary")
    g = subgradient(spec, w, mu)
    f0 = value_f(spec, w, mu)
    pieces = np.sort(_pieces(spec, w, mu))
    margin = 4.0 * h * max(gradient_bound(spec, mu), 1e-300)
    smooth = len(pieces) == 1 or pieces[1] - pieces[0] > margin
    K = len(w)
    gap = 0.0
    for a, b in itertools.permutations(range(K), 2):
        d = np.zeros(K)
        d[a], d[b] = 1.0, -1.0
        fp = value_f(spec, w + h * d, mu)
        fm = value_f(spec, w - h * d, mu)
        slope = g @ d
        if smooth:
            gap = max(gap, abs((fp - fm) / (2 * h) - slope))
        else:
            gap = max(gap, fp - f0 - h * slope, fm - f0 + h * slope)
    return gap
