"""Scalar-loop kernels shared by the public API and the episode loop.

Everything here must stay inside the numba-compilable subset: integer codes
instead of enums, preallocated output arrays, no Python objects except the
numpy ``Generator``.  Arms are 0-based.  All argmin/argmax ties resolve to
the smallest index.
"""

import math

import numpy as np

from ._accel import njit

# problem families
THRESHOLDING = 0
BEST_ARM = 1
SIGNED = 2

# sampling rules
LMA = 0
LMAC = 1
BEST_CHALLENGER = 2
DIRECT_TRACKING = 3
TTTS = 4
UNIFORM = 5
FRANK_WOLFE = 6

# threshold kinds
PRACTICAL = 0
THEORETICAL = 1

# episode outcomes
STOPPED = 0
TIMEOUT = 1

# diagnostics slots
DIAG_TTTS_CAP_HITS = 0
DIAG_TTTS_RESAMPLES = 1
DIAG_GAMMA_CLAMPS = 2
DIAG_FORCED_PULLS = 3
DIAG_FALLBACK_PULLS = 4
N_DIAG = 5


@njit
def kl_gauss(x, y):
    d = x - y
    return 0.5 * d * d


@njit
def argmax_first(x):
    best = 0
    for a in range(1, x.shape[0]):
        if x[a] > x[best]:
            best = a
    return best


@njit
def argmin_first(x):
    best = 0
    for a in range(1, x.shape[0]):
        if x[a] < x[best]:
            best = a
    return best


@njit
def is_decided(family, thr, mu):
    K = mu.shape[0]
    if family == THRESHOLDING:
        for a in range(K):
            if mu[a] == thr:
                return False
        return True
    if family == BEST_ARM:
        i = argmax_first(mu)
        for a in range(K):
            if a != i and mu[a] == mu[i]:
                return False
        return True
    above = 0
    below = 0
    for a in range(K):
        if mu[a] > thr:
            above += 1
        elif mu[a] < thr:
            below += 1
    return above == K or below == K


@njit
def pair_mean(wi, wa, mi, ma):
    s = wi + wa
    if s <= 0.0:
        return 0.5 * (mi + ma)
    return (wi * mi + wa * ma) / s


@njit
def value_grad(family, thr, w, mu, grad):
    """Return F(w, mu) and write one supergradient into ``grad``.

    ``w`` may be unnormalised (counts), which turns F into the GLR statistic.
    Off the partition (boundary or mixed-sign means) the alternative set is
    the whole partition, so the value is the cheapest projection.
    """
    K = mu.shape[0]
    for a in range(K):
        grad[a] = 0.0

    if family == THRESHOLDING:
        b = 0
        best = w[0] * kl_gauss(mu[0], thr)
        for a in range(1, K):
            c = w[a] * kl_gauss(mu[a], thr)
            if c < best:
                best = c
                b = a
        grad[b] = kl_gauss(mu[b], thr)
        return best

    if family == BEST_ARM:
        i = argmax_first(mu)
        best = np.inf
        ch = -1
        m_best = 0.0
        for a in range(K):
            if a == i:
                continue
            m = pair_mean(w[i], w[a], mu[i], mu[a])
            c = w[i] * kl_gauss(mu[i], m) + w[a] * kl_gauss(mu[a], m)
            if c < best:
                best = c
                ch = a
                m_best = m
        grad[i] = kl_gauss(mu[i], m_best)
        grad[ch] = kl_gauss(mu[ch], m_best)
        return best

    # signed: cost of pushing the wrong-side arms onto the threshold
    cost_plus = 0.0
    cost_minus = 0.0
    n_above = 0
    n_below = 0
    for a in range(K):
        if mu[a] < thr:
            cost_plus += w[a] * kl_gauss(mu[a], thr)
            n_below += 1
        elif mu[a] > thr:
            cost_minus += w[a] * kl_gauss(mu[a], thr)
            n_above += 1
    if n_above == K:
        use_plus = False
    elif n_below == K:
        use_plus = True
    else:
        use_plus = cost_plus <= cost_minus
    for a in range(K):
        if (use_plus and mu[a] < thr) or ((not use_plus) and mu[a] > thr):
            grad[a] = kl_gauss(mu[a], thr)
    if use_plus:
        return cost_plus
    return cost_minus


@njit
def fw_arm(family, thr, w, mu, grad):
    """Frank-Wolfe vertex: arm with the largest supergradient entry.

    For thresholding the supergradient has a single nonzero entry at the
    cheapest arm; that arm is returned directly so a zero divergence (mean
    on the threshold) cannot hand the choice to arm 0.
    """
    if family == THRESHOLDING:
        b = 0
        best = w[0] * kl_gauss(mu[0], thr)
        for a in range(1, mu.shape[0]):
            c = w[a] * kl_gauss(mu[a], thr)
            if c < best:
                best = c
                b = a
        return b
    value_grad(family, thr, w, mu, grad)
    return argmax_first(grad)


@njit
def signed_costs(counts, mu, thr):
    """Projection costs onto the closures of S+ and S-."""
    cost_plus = 0.0
    cost_minus = 0.0
    for a in range(mu.shape[0]):
        if mu[a] < thr:
            cost_plus += counts[a] * kl_gauss(mu[a], thr)
        elif mu[a] > thr:
            cost_minus += counts[a] * kl_gauss(mu[a], thr)
    return cost_plus, cost_minus


@njit
def best_arm_w_star(mu, tol, max_iter, out):
    """Optimal proportions for Gaussian best-arm identification.

    Outer bisection on y in (0, min_a D_a) for sum_a x_a(y)^2 = 1, where
    D_a = d(mu_i, mu_a) and x_a(y) = y / (D_a - y) inverts the increasing
    map x -> x/(1+x) D_a in closed form.  Returns the number of iterations
    used, or -1 if the bracket did not shrink below ``tol`` (relative).
    """
    K = mu.shape[0]
    i = argmax_first(mu)
    d_min = np.inf
    for a in range(K):
        if a != i:
            d = kl_gauss(mu[i], mu[a])
            if d < d_min:
                d_min = d
    lo = 0.0
    hi = d_min
    it = 0
    converged = False
    while it < max_iter:
        y = 0.5 * (lo + hi)
        s = 0.0
        for a in range(K):
            if a != i:
                x = y / (kl_gauss(mu[i], mu[a]) - y)
                s += x * x
        if s > 1.0:
            hi = y
        else:
            lo = y
        it += 1
        if hi - lo <= tol * d_min:
            converged = True
            break
    y = 0.5 * (lo + hi)
    total = 1.0
    for a in range(K):
        if a == i:
            out[a] = 1.0
        else:
            out[a] = y / (kl_gauss(mu[i], mu[a]) - y)
            total += out[a]
    for a in range(K):
        out[a] /= total
    if not converged:
        return -1
    return it


@njit
def w_star_into(family, thr, mu, tol, max_iter, out):
    """Optimal proportions for a decided instance; returns status like above."""
    K = mu.shape[0]
    if family == THRESHOLDING:
        total = 0.0
        for a in range(K):
            out[a] = 1.0 / kl_gauss(mu[a], thr)
            total += out[a]
        for a in range(K):
            out[a] /= total
        return 0
    if family == SIGNED:
        dmax = 0.0
        for a in range(K):
            d = kl_gauss(mu[a], thr)
            if d > dmax:
                dmax = d
        n = 0
        for a in range(K):
            if kl_gauss(mu[a], thr) == dmax:
                out[a] = 1.0
                n += 1
            else:
                out[a] = 0.0
        for a in range(K):
            out[a] /= n
        return 0
    return best_arm_w_star(mu, tol, max_iter, out)


@njit
def softmax_into(G, eta, out):
    K = G.shape[0]
    gmax = G[0]
    for a in range(1, K):
        if G[a] > gmax:
            gmax = G[a]
    total = 0.0
    for a in range(K):
        out[a] = math.exp(eta * (G[a] - gmax))
        total += out[a]
    for a in range(K):
        out[a] /= total


@njit
def practical_threshold(t, delta):
    return math.log((math.log(t) + 1.0) / delta)


@njit
def theoretical_threshold(counts, delta, c_tilde):
    K = counts.shape[0]
    ld = math.log(1.0 / delta)
    s = 0.0
    for a in range(K):
        s += math.log(math.log(counts[a]) + 3.0)
    return ld + K * math.log(4.0 * ld + 1.0) + 6.0 * s + K * c_tilde


@njit
def forced_arm(counts, t, offset):
    """Least-pulled arm if it lags below sqrt(t) - offset*K, else -1."""
    K = counts.shape[0]
    a = argmin_first(counts)
    if counts[a] < math.sqrt(t) - offset * K:
        return a
    return -1


@njit
def track_arm(cum_weights, counts):
    best = 0
    gap = cum_weights[0] - counts[0]
    for a in range(1, cum_weights.shape[0]):
        g = cum_weights[a] - counts[a]
        if g > gap:
            gap = g
            best = a
    return best


@njit
def best_challenger_arm(counts, mu_hat, t):
    K = mu_hat.shape[0]
    i = argmax_first(mu_hat)
    wi = counts[i] / t
    best = np.inf
    ch = -1
    m_best = 0.0
    for a in range(K):
        if a == i:
            continue
        wa = counts[a] / t
        m = pair_mean(wi, wa, mu_hat[i], mu_hat[a])
        c = wi * kl_gauss(mu_hat[i], m) + wa * kl_gauss(mu_hat[a], m)
        if c < best:
            best = c
            ch = a
            m_best = m
    if kl_gauss(mu_hat[i], m_best) > kl_gauss(mu_hat[ch], m_best):
        return i
    return ch


@njit
def ttts_arm(counts, sums, rng, cap, diag):
    K = counts.shape[0]
    mean = np.empty(K)
    sd = np.empty(K)
    for a in range(K):
        mean[a] = sums[a] / (counts[a] + 1.0)
        sd[a] = 1.0 / math.sqrt(counts[a] + 1.0)
    first = np.empty(K)
    for a in range(K):
        first[a] = mean[a] + sd[a] * rng.standard_normal()
    I = argmax_first(first)
    second = np.empty(K)
    J = I
    tries = 0
    while tries < cap:
        for a in range(K):
            second[a] = mean[a] + sd[a] * rng.standard_normal()
        tries += 1
        J = argmax_first(second)
        if J != I:
            break
    diag[DIAG_TTTS_RESAMPLES] += tries
    if J == I:
        diag[DIAG_TTTS_CAP_HITS] += 1.0
        J = -1
        for a in range(K):
            if a != I and (J < 0 or mean[a] > mean[J]):
                J = a
    if kl_gauss(first[I], second[I]) > kl_gauss(first[J], second[J]):
        return I
    return J


@njit
def _append_row(traj, nrow, t, w_tilde, w_prime, mu_hat, glr, counts, cum_wt, cum_wp):
    if nrow == traj.shape[0]:
        bigger = np.empty((2 * traj.shape[0], traj.shape[1]))
        bigger[:nrow] = traj[:nrow]
        traj = bigger
    K = mu_hat.shape[0]
    row = traj[nrow]
    row[0] = t
    row[1:1 + K] = w_tilde
    row[1 + K:1 + 2 * K] = w_prime
    row[1 + 2 * K:1 + 3 * K] = mu_hat
    row[1 + 3 * K] = glr
    row[2 + 3 * K:2 + 4 * K] = counts
    row[2 + 4 * K:2 + 5 * K] = cum_wt
    row[2 + 5 * K:2 + 6 * K] = cum_wp
    return traj, nrow + 1


@njit
def episode_loop(family, thr, mu, rule, c_eta, gamma_scale, clip_m, explore_offset,
                 thr_kind, delta, c_tilde, stop_enabled, max_steps, stride,
                 ttts_cap, wstar_tol, wstar_max_iter, rng):
    """Run one episode: K initial pulls, then stop-check / select / pull.

    Returns ``(t, outcome, counts, sums, cum_w_prime, cum_w_tilde, G, diag,
    trajectory)``.  Trajectory rows are
    ``t | w_tilde | w_prime | mu_hat | glr | counts | cum_w_tilde | cum_w_prime``
    and are recorded whenever ``t % stride == 0`` plus at the final step.
    """
    K = mu.shape[0]
    counts = np.zeros(K)
    sums = np.zeros(K)
    mu_hat = np.zeros(K)
    grad = np.zeros(K)
    scratch = np.zeros(K)
    cum_wp = np.zeros(K)
    cum_wt = np.zeros(K)
    G = np.zeros(K)
    w_tilde = np.full(K, 1.0 / K)
    w_prime = np.full(K, 1.0 / K)
    diag = np.zeros(N_DIAG)
    traj = np.empty((64 if stride > 0 else 0, 6 * K + 2))
    nrow = 0
    has_weights = rule == LMA or rule == LMAC

    for a in range(K):
        r = mu[a] + rng.standard_normal()
        counts[a] += 1.0
        sums[a] += r
        for b in range(K):
            cum_wp[b] += 1.0 / K
            cum_wt[b] += 1.0 / K
    t = K
    outcome = TIMEOUT
    last_row_t = -1

    while True:
        for a in range(K):
            mu_hat[a] = sums[a] / counts[a]
        record = stride > 0 and t % stride == 0
        glr = np.nan
        if stop_enabled or record:
            glr = value_grad(family, thr, counts, mu_hat, scratch)
        if record:
            if has_weights:
                traj, nrow = _append_row(traj, nrow, t, w_tilde, w_prime, mu_hat,
                                         glr, counts, cum_wt, cum_wp)
            else:
                traj, nrow = _append_row(traj, nrow, t, scratch * np.nan,
                                         scratch * np.nan, mu_hat, glr, counts,
                                         cum_wt * np.nan, cum_wp * np.nan)
            last_row_t = t
        if stop_enabled:
            if thr_kind == PRACTICAL:
                beta = practical_threshold(t, delta)
            else:
                beta = theoretical_threshold(counts, delta, c_tilde)
            if glr >= beta:
                outcome = STOPPED
                break
        if t >= max_steps:
            break

        if has_weights:
            value_grad(family, thr, w_tilde, mu_hat, grad)
            lim = clip_m * math.sqrt(t)
            for a in range(K):
                G[a] += min(grad[a], lim)
            if rule == LMA:
                eta = c_eta / math.sqrt(t + 1.0)
            else:
                eta = c_eta
            softmax_into(G, eta, w_tilde)
            gamma = gamma_scale / math.sqrt(t)
            if gamma > 1.0:
                gamma = 1.0
                diag[DIAG_GAMMA_CLAMPS] += 1.0
            for a in range(K):
                w_prime[a] = (1.0 - gamma) * w_tilde[a] + gamma / K
                cum_wp[a] += w_prime[a]
                cum_wt[a] += w_tilde[a]
            arm = track_arm(cum_wp, counts)
        elif rule == UNIFORM:
            arm = t % K
        elif rule == FRANK_WOLFE:
            # F is 1-homogeneous, so the vertex chosen at N equals the one at N/t
            arm = fw_arm(family, thr, counts, mu_hat, grad)
        elif rule == TTTS:
            arm = ttts_arm(counts, sums, rng, ttts_cap, diag)
        else:
            arm = forced_arm(counts, t, explore_offset)
            if arm >= 0:
                diag[DIAG_FORCED_PULLS] += 1.0
            elif rule == BEST_CHALLENGER:
                arm = best_challenger_arm(counts, mu_hat, t)
            elif not is_decided(family, thr, mu_hat):
                arm = t % K
                diag[DIAG_FALLBACK_PULLS] += 1.0
            else:
                status = w_star_into(family, thr, mu_hat, wstar_tol,
                                     wstar_max_iter, scratch)
                if status < 0:
                    raise RuntimeError("optimal-weight bisection did not converge")
                for a in range(K):
                    scratch[a] -= counts[a] / t
                arm = argmax_first(scratch)

        r = mu[arm] + rng.standard_normal()
        counts[arm] += 1.0
        sums[arm] += r
        t += 1

    if stride > 0 and last_row_t != t:
        for a in range(K):
            mu_hat[a] = sums[a] / counts[a]
        glr = value_grad(family, thr, counts, mu_hat, scratch)
        if has_weights:
            traj, nrow = _append_row(traj, nrow, t, w_tilde, w_prime, mu_hat,
                                     glr, counts, cum_wt, cum_wp)
        else:
            traj, nrow = _append_row(traj, nrow, t, scratch * np.nan,
                                     scratch * np.nan, mu_hat, glr, counts,
                                     cum_wt * np.nan, cum_wp * np.nan)
    return t, outcome, counts, sums, cum_wp, cum_wt, G, diag, traj[:nrow]
