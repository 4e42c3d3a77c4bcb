"""Acceptance suite: eleven end-to-end criteria at fixed tolerances.

Each test records one PASS/FAIL line; the lines are printed in the pytest
terminal summary and when this file is run as a script.
"""

import csv
import io
import json
import math
import sys
import time
from contextlib import redirect_stderr, redirect_stdout

import numpy as np
import pytest

from mirrorbandit import (AgentState, AscentState, EpisodeConfig, ProblemSpec, SamplerConfig,
                          ThresholdSpec, ascent_step, characteristic_time, frank_wolfe_select,
                          glr_statistic, run_bench, run_episode, subgradient, track, value_f,
                          w_star)
from mirrorbandit.cli import main as cli_main
from mirrorbandit.oracle import default_box, grid_glr, grid_glr_error_bound

MEANS = (1.0, 0.85, 0.8, 0.75)
W_STAR = np.array([0.403, 0.366, 0.147, 0.083])
ANCHORS = {0.1: 1066.0, 0.01: 2133.0}
BA = ProblemSpec.best_arm()

RESULTS: dict[int, str] = {}
_bench_cache: dict[float, object] = {}


def report(n: int, ok: bool, detail: str):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def lma_bench(delta: float):
    if delta not in _bench_cache:
        cfg = EpisodeConfig(BA, MEANS, SamplerConfig("LMA"), ThresholdSpec("practical", delta),
                            seed=2024)
        _bench_cache[delta] = run_bench([cfg], 1000, parallelism=4).stats("LMA", delta)
    return _bench_cache[delta]


def test_criterion_01_oracle_weights():
    start = time.perf_counter()
    out = io.StringIO()
    with redirect_stdout(out):
        code = cli_main(["wstar", "--oracle", "--oracle-step", "0.005", "--format", "json"])
    doc = json.loads(out.getvalue())
    elapsed = time.perf_counter() - start
    w = np.array(doc["w_star"])
    grid = np.array(doc["oracle"]["w_grid"])
    err_w = np.max(np.abs(w - W_STAR))
    err_grid = np.max(np.abs(grid - w))
    ok = code == 0 and err_w <= 0.002 and err_grid <= 0.02 and elapsed < 10
    report(1, ok, f"w*={np.round(w, 4).tolist()} |w*-ref|={err_w:.4f} "
                  f"|grid-w*|={err_grid:.4f} time={elapsed:.2f}s")


def test_criterion_02_characteristic_time():
    start = time.perf_counter()
    T = characteristic_time(BA, MEANS)
    v1, v2 = T * math.log(10), T * math.log(100)
    elapsed = time.perf_counter() - start
    ok = abs(v1 - 1066) <= 5 and abs(v2 - 2133) <= 10 and elapsed < 1
    report(2, ok, f"T*={T:.3f} T*log10={v1:.2f} T*log100={v2:.2f} time={elapsed:.3f}s")


def test_criterion_03_delta_correctness():
    s = lma_bench(0.1)
    ok = s.timeouts == 0 and s.error_rate <= 0.1
    report(3, ok, f"error rate {s.error_rate:.4f} over {s.stopped} stopped runs "
                  f"(timeouts {s.timeouts})")


def test_criterion_04_sample_complexity():
    parts, ok = [], True
    for delta, anchor in ANCHORS.items():
        s = lma_bench(delta)
        ratio = s.mean_tau / anchor
        ok &= s.timeouts == 0 and 0.5 <= ratio <= 2.5
        parts.append(f"delta={delta}: mean tau {s.mean_tau:.1f} ({ratio:.2f} x {anchor:.0f})")
    report(4, ok, "; ".join(parts))


def test_criterion_05_weight_convergence():
    ws = w_star(BA, MEANS)
    cfg = EpisodeConfig(BA, MEANS, SamplerConfig("LMA"), stop=False, max_steps=100_000, seed=5)
    errs = []
    for seed in range(10):
        r = run_episode(cfg, seed)
        errs.append(np.max(np.abs(r.proportions - ws)))
    mean_err = float(np.mean(errs))
    report(5, mean_err <= 0.05, f"mean |N(T)/T - w*|_inf = {mean_err:.4f} over 10 seeds "
                                f"(max {max(errs):.4f})")


def _weight_streams(rng, n_streams, length):
    """Random and adversarial weight sequences on the simplex."""
    for i in range(n_streams):
        K = int(rng.integers(2, 9))
        kind = i % 4
        if kind == 0:
            W = rng.dirichlet(np.full(K, 0.05), size=length)
        elif kind == 1:
            W = np.eye(K)[rng.integers(0, K, size=length)]
        elif kind == 2:
            # long runs on one vertex, then switch
            W = np.eye(K)[np.repeat(rng.integers(0, K, size=length // 50 + 1), 50)[:length]]
        else:
            W = rng.dirichlet(np.full(K, 1.0), size=length)
        yield K, W


def test_criterion_06_tracking_invariants():
    rng = np.random.default_rng(6)
    violations = 0
    worst = 0.0
    for K, W in _weight_streams(rng, 100, 10_000):
        cum = np.zeros(K)
        counts = np.zeros(K)
        for w in W:
            cum += w
            counts[track(cum, counts)] += 1
            dev = np.max(np.abs(cum - counts))
            worst = max(worst, dev / K)
            violations += dev > K
    K = len(MEANS)
    traj_viol = 0
    worst_tilde = 0.0
    cfg = EpisodeConfig(BA, MEANS, SamplerConfig("LMA"), stop=False, max_steps=20_000, stride=1)
    for seed in range(10):
        tr = run_episode(cfg, seed).trajectory
        t = tr.t.astype(float)
        dev = np.max(np.abs(tr.cum_w_tilde - tr.counts), axis=1)
        worst_tilde = max(worst_tilde, float(np.max(dev / (2 * K * np.sqrt(t)))))
        traj_viol += int(np.sum(dev > 2 * K * np.sqrt(t)))
        traj_viol += int(np.sum(tr.counts < (np.sqrt(t) / (4 * K) - 2 * K)[:, None]))
        traj_viol += int(np.sum(np.max(np.abs(tr.cum_w_prime - tr.counts), axis=1) > K))
    ok = violations == 0 and traj_viol == 0
    report(6, ok, f"stream violations {violations} (worst dev/K {worst:.3f}); trajectory "
                  f"violations {traj_viol} (worst dev/(2K sqrt t) {worst_tilde:.3f})")


def test_criterion_07_exp_weights_regret():
    rng = np.random.default_rng(7)
    T = 10_000
    violations = 0
    worst = 0.0
    for i in range(20):
        K = int(rng.integers(2, 11))
        if i % 2 == 0:
            gains = rng.random((T, K))
        else:
            # adversarial-style: the best arm switches in blocks of growing length
            gains = np.zeros((T, K))
            t0, block, arm = 0, 10, 0
            while t0 < T:
                gains[t0:t0 + block, arm] = 1.0
                t0, block, arm = t0 + block, int(block * 1.5), (arm + 1) % K
            gains = np.clip(gains + 0.1 * rng.random((T, K)), 0, 1)
        state = AscentState.start(K, c_eta=1.0)
        w = state.weights
        earned = 0.0
        for t in range(T):
            earned += gains[t] @ w
            state, w = ascent_step(state, gains[t])
        regret = gains.sum(axis=0).max() - earned
        bound = (math.log(K) + 4) * math.sqrt(T)
        worst = max(worst, regret / bound)
        violations += regret > bound
    report(7, violations == 0, f"violations {violations}/20 (worst regret/bound {worst:.3f})")


def test_criterion_08_supergradient():
    rng = np.random.default_rng(8)
    violations = 0
    for _ in range(10_000):
        K = int(rng.integers(2, 7))
        family = int(rng.integers(0, 3))
        mu = rng.normal(0, 1.5, K)
        spec = [ProblemSpec.thresholding(rng.normal()), BA, ProblemSpec.signed(rng.normal())][family]
        w = rng.dirichlet(np.ones(K))
        w = np.maximum(w, 1e-12)
        w /= w.sum()
        v = rng.dirichlet(np.full(K, 0.5))
        g = subgradient(spec, w, mu)
        violations += value_f(spec, v, mu) > value_f(spec, w, mu) + g @ (v - w) + 1e-9
    report(8, violations == 0, f"violations {violations}/10000")


def test_criterion_09_glr_oracle():
    rng = np.random.default_rng(9)
    violations = 0
    worst = 0.0
    for i in range(100):
        spec = [ProblemSpec.thresholding(rng.uniform(-0.5, 0.5)), BA,
                ProblemSpec.signed(rng.uniform(-0.5, 0.5))][i % 3]
        counts = rng.integers(1, 60, 2)
        mu_hat = rng.uniform(-1, 1, 2)
        box = default_box(spec, mu_hat)
        exact = glr_statistic(spec, counts, mu_hat)
        grid = grid_glr(spec, counts, mu_hat, 1e-3, box)
        bound = grid_glr_error_bound(counts, mu_hat, 1e-3, box)
        gap = grid - exact
        worst = max(worst, gap / bound)
        violations += not (-1e-9 <= gap <= bound)
    report(9, violations == 0, f"violations {violations}/100 (worst gap/bound {worst:.3f})")


def test_criterion_10_frank_wolfe_identity():
    rng = np.random.default_rng(10)
    mismatches = 0
    for i in range(10_000):
        K = int(rng.integers(2, 8))
        T = float(rng.normal())
        counts = rng.integers(1, 30, K)
        if i % 2:
            # coarse values: exact ties and means on the threshold are common
            mu_hat = T + rng.integers(-2, 3, K) * 0.5
        else:
            mu_hat = rng.normal(T, 1.0, K)
        state = AgentState(counts, counts * mu_hat, np.zeros(K), int(counts.sum()))
        spec = ProblemSpec.thresholding(T)
        d = 0.5 * (state.means - T) * (state.means - T)
        expected = int(np.argmin(counts * d))
        mismatches += frank_wolfe_select(state, spec) != expected
    report(10, mismatches == 0, f"mismatches {mismatches}/10000")


def _bench_csv(tmp_path, parallelism, tag):
    path = tmp_path / f"bench_{tag}.csv"
    argv = ["bench", "--episodes", "40", "--rule", "LMA,LMAc,BC,DT,TTTS,Unif",
            "--delta", "0.1,0.01", "--seed", "77", "--parallelism", str(parallelism),
            "--out", str(path)]
    with redirect_stderr(io.StringIO()):
        assert cli_main(argv) == 0
    rows = list(csv.reader(io.StringIO(path.read_text())))
    wall = rows[0].index("wall_ms")
    return path.read_bytes(), [r[:wall] + r[wall + 1:] for r in rows]


def test_criterion_11_determinism(tmp_path):
    runs = [_bench_csv(tmp_path, p, f"{p}_{i}") for p in (1, 8) for i in range(2)]
    stripped = [r[1] for r in runs]
    ok = all(s == stripped[0] for s in stripped) and len(stripped[0]) == 1 + 6 * 2 * 40
    ok &= all(b"\r" not in r[0] for r in runs)
    report(11, ok, f"{len(runs)} CSVs, {len(stripped[0]) - 1} rows each, identical without wall_ms")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
