"""Episode runner, Monte-Carlo benchmarks and result files."""

from __future__ import annotations

import csv
import json
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from . import _kernels as _k
from ._accel import BACKEND
from .core import GaussianBandit, RngStream, ValidationError
from .problems import NumericError, ProblemSpec, answer, gradient_bound
from .sampling import Rule, SamplerConfig
from .stopping import ThresholdKind, ThresholdSpec, decide_from

SPEC_VERSION = "1.0"
CSV_HEADER = ("algorithm", "delta", "seed", "tau", "correct", "outcome", "wall_ms")
QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)

STOPPED = "Stopped"
TIMEOUT = "Timeout"


class EpisodeError(RuntimeError):
    """A numeric failure inside an episode, tagged with the episode identity."""


@dataclass(frozen=True)
class EpisodeConfig:
    """Problem, true means, sampling rule, threshold and run limits.

    ``stop=False`` disables the stopping rule so the episode runs for exactly
    ``max_steps`` pulls (used for convergence and tracking studies).
    ``stride > 0`` records a trajectory row every ``stride`` steps.
    """

    spec: ProblemSpec
    means: tuple
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    threshold: ThresholdSpec = field(default_factory=ThresholdSpec)
    seed: int = 0
    max_steps: int = 10_000_000
    stride: int = 0
    stop: bool = True
    wstar_tol: float = 1e-8
    wstar_max_iter: int = 200

    def __post_init__(self):
        bandit = GaussianBandit(self.means)
        object.__setattr__(self, "means", tuple(float(m) for m in bandit.means))
        if answer(self.spec, bandit.means) is None:
            raise ValidationError("the true means must lie strictly inside one class")
        self.sampler.check_family(self.spec.family)
        if self.max_steps < bandit.n_arms:
            raise ValidationError("max_steps must be at least the number of arms")
        if self.stride < 0:
            raise ValidationError("stride must be nonnegative")

    @property
    def n_arms(self) -> int:
        return len(self.means)

    @property
    def label(self) -> str:
        return self.sampler.label

    @property
    def c_eta(self) -> float:
        """Learning-rate scale actually used (auto: inverse gradient bound)."""
        if self.sampler.c_eta is not None:
            return self.sampler.c_eta
        return 1.0 / gradient_bound(self.spec, self.means)

    def to_dict(self) -> dict:
        return {
            "problem": self.spec.to_dict(),
            "means": list(self.means),
            "sampler": self.sampler.to_dict(),
            "threshold": self.threshold.to_dict(),
            "seed": self.seed,
            "max_steps": self.max_steps,
            "stride": self.stride,
            "stop": self.stop,
        }


@dataclass
class Trajectory:
    """Recorded rows; weight columns are NaN for rules that propose none."""

    t: np.ndarray
    w_tilde: np.ndarray
    w_prime: np.ndarray
    mu_hat: np.ndarray
    glr: np.ndarray
    counts: np.ndarray
    cum_w_tilde: np.ndarray
    cum_w_prime: np.ndarray

    @classmethod
    def from_rows(cls, rows: np.ndarray, K: int) -> "Trajectory":
        return cls(
            t=rows[:, 0].astype(np.int64),
            w_tilde=rows[:, 1:1 + K],
            w_prime=rows[:, 1 + K:1 + 2 * K],
            mu_hat=rows[:, 1 + 2 * K:1 + 3 * K],
            glr=rows[:, 1 + 3 * K],
            counts=rows[:, 2 + 3 * K:2 + 4 * K].astype(np.int64),
            cum_w_tilde=rows[:, 2 + 4 * K:2 + 5 * K],
            cum_w_prime=rows[:, 2 + 5 * K:2 + 6 * K],
        )

    def __len__(self):
        return len(self.t)


@dataclass
class EpisodeResult:
    algorithm: str
    delta: float
    seed: int
    stream: int
    tau: int
    outcome: str
    decision: object
    correct: bool
    counts: np.ndarray
    mu_hat: np.ndarray
    wall_time: float
    diagnostics: dict
    trajectory: Optional[Trajectory] = None

    @property
    def proportions(self) -> np.ndarray:
        return self.counts / self.tau

    def record(self) -> "EpisodeRecord":
        return EpisodeRecord(self.algorithm, self.delta, self.seed, self.tau,
                             self.correct, self.outcome, 1e3 * self.wall_time)

    def to_dict(self) -> dict:
        decision = self.decision
        if isinstance(decision, frozenset):
            decision = sorted(decision)
        return {
            "algorithm": self.algorithm, "delta": self.delta, "seed": self.seed,
            "stream": self.stream, "tau": self.tau, "outcome": self.outcome,
            "decision": decision, "correct": self.correct,
            "counts": self.counts.tolist(), "mu_hat": self.mu_hat.tolist(),
            "wall_ms": 1e3 * self.wall_time, "diagnostics": self.diagnostics,
        }


def run_episode(config: EpisodeConfig, stream: int = 0) -> EpisodeResult:
    """Run one episode with the random stream ``(config.seed, stream)``."""
    rng = RngStream(config.seed, stream).generator()
    mu = np.asarray(config.means, dtype=float)
    s = config.sampler
    start = time.perf_counter()
    try:
        t, outcome, counts, sums, _, _, _, diag, rows = _k.episode_loop(
            int(config.spec.family), config.spec.thr, mu, int(s.rule),
            float(config.c_eta), float(s.gamma_scale), float(s.clip), float(s.explore_offset),
            int(config.threshold.kind), float(config.threshold.delta),
            float(config.threshold.c_tilde), bool(config.stop), int(config.max_steps),
            int(config.stride), int(s.ttts_cap), float(config.wstar_tol),
            int(config.wstar_max_iter), rng,
        )
    except (RuntimeError, ArithmeticError, NumericError) as exc:
        raise EpisodeError(f"{config.label} seed={config.seed} stream={stream}: {exc}") from exc
    wall = time.perf_counter() - start

    if diag[_k.DIAG_GAMMA_CLAMPS] > 0:
        warnings.warn(f"exploration rate clamped to 1 on {int(diag[_k.DIAG_GAMMA_CLAMPS])} steps")
    mu_hat = sums / counts
    if outcome == _k.STOPPED:
        decision = decide_from(config.spec, counts, mu_hat)
        correct = decision == answer(config.spec, mu)
        label = STOPPED
    else:
        decision, correct, label = None, False, TIMEOUT
    trajectory = Trajectory.from_rows(rows, len(mu)) if config.stride > 0 else None
    return EpisodeResult(
        algorithm=config.label, delta=config.threshold.delta, seed=config.seed,
        stream=stream, tau=int(t), outcome=label, decision=decision, correct=bool(correct),
        counts=counts.astype(np.int64), mu_hat=mu_hat, wall_time=wall,
        diagnostics={
            "ttts_cap_hits": int(diag[_k.DIAG_TTTS_CAP_HITS]),
            "ttts_resamples": int(diag[_k.DIAG_TTTS_RESAMPLES]),
            "gamma_clamps": int(diag[_k.DIAG_GAMMA_CLAMPS]),
            "forced_pulls": int(diag[_k.DIAG_FORCED_PULLS]),
            "fallback_pulls": int(diag[_k.DIAG_FALLBACK_PULLS]),
            "backend": BACKEND,
        },
        trajectory=trajectory,
    )


@dataclass(frozen=True)
class EpisodeRecord:
    """One CSV row."""

    algorithm: str
    delta: float
    seed: int
    tau: int
    correct: bool
    outcome: str
    wall_ms: float


@dataclass(frozen=True)
class GroupStats:
    algorithm: str
    delta: float
    runs: int
    stopped: int
    timeouts: int
    errors: int
    mean_tau: float
    quantiles: dict
    error_rate: float
    step_wall_ms: float

    @property
    def median_tau(self) -> float:
        return self.quantiles[0.5]


class BenchSummary:
    """Per-(algorithm, delta) statistics over a set of episode records.

    Statistics are recomputed from the records, so merging summaries gives
    exactly what a single pass over all episodes would.  Sample statistics
    use stopped runs only; timeouts are counted separately.
    """

    def __init__(self, records: Iterable[EpisodeRecord] = (), configs: Sequence[dict] = ()):
        self.records = list(records)
        self.configs = list(configs)

    def merge(self, other: "BenchSummary") -> "BenchSummary":
        return BenchSummary(self.records + other.records, self.configs + other.configs)

    def groups(self) -> list[tuple[str, float]]:
        seen = {}
        for r in self.records:
            seen.setdefault((r.algorithm, r.delta), None)
        return sorted(seen)

    def stats(self, algorithm: str, delta: float) -> GroupStats:
        rows = [r for r in self.records if r.algorithm == algorithm and r.delta == delta]
        if not rows:
            raise KeyError((algorithm, delta))
        stopped = [r for r in rows if r.outcome == STOPPED]
        taus = np.sort(np.array([r.tau for r in stopped], dtype=np.int64))
        errors = sum(1 for r in stopped if not r.correct)
        if len(taus):
            mean_tau = int(taus.sum()) / len(taus)
            quantiles = {q: float(np.quantile(taus, q)) for q in QUANTILES}
        else:
            mean_tau, quantiles = math.nan, {q: math.nan for q in QUANTILES}
        steps = sum(r.tau for r in rows)
        return GroupStats(
            algorithm=algorithm, delta=delta, runs=len(rows), stopped=len(stopped),
            timeouts=len(rows) - len(stopped), errors=errors, mean_tau=mean_tau,
            quantiles=quantiles,
            error_rate=errors / len(stopped) if stopped else math.nan,
            step_wall_ms=math.fsum(r.wall_ms for r in rows) / steps if steps else math.nan,
        )

    def all_stats(self) -> list[GroupStats]:
        return [self.stats(a, d) for a, d in self.groups()]

    def table(self) -> str:
        lines = [f"{'algorithm':>9} {'delta':>7} {'runs':>6} {'mean tau':>10} "
                 f"{'median':>8} {'error':>7} {'timeouts':>8} {'us/step':>8}"]
        for s in self.all_stats():
            lines.append(f"{s.algorithm:>9} {s.delta:>7.3g} {s.runs:>6d} {s.mean_tau:>10.1f} "
                         f"{s.median_tau:>8.0f} {s.error_rate:>7.3f} {s.timeouts:>8d} "
                         f"{1e3 * s.step_wall_ms:>8.2f}")
        return "\n".join(lines)


def run_bench(configs: Sequence[EpisodeConfig], episodes_per_config: int,
              parallelism: int = 1, keep_results: bool = False):
    """Run ``episodes_per_config`` episodes (streams ``0..n-1``) per config.

    Episodes run on a thread pool (the compiled kernels release the GIL);
    results are collected in (config, episode) order so the summary does
    not depend on ``parallelism``.  With ``keep_results`` the full
    :class:`EpisodeResult` list is returned alongside the summary.
    """
    if episodes_per_config < 1:
        raise ValidationError("episodes_per_config must be at least 1")
    if parallelism < 1:
        raise ValidationError("parallelism must be at least 1")
    tasks = [(c, e) for c in configs for e in range(episodes_per_config)]
    if configs:
        # compile the kernels outside the timed episodes
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            run_episode(replace(configs[0], max_steps=configs[0].n_arms, stride=0))
    if parallelism == 1:
        results = [run_episode(c, e) for c, e in tasks]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(lambda ce: run_episode(*ce), tasks))
    summary = BenchSummary([r.record() for r in results], [c.to_dict() for c in configs])
    if keep_results:
        return summary, results
    return summary


def _records(data) -> list[EpisodeRecord]:
    if isinstance(data, BenchSummary):
        return data.records
    return [r.record() if isinstance(r, EpisodeResult) else r for r in data]


def format_csv_row(r: EpisodeRecord) -> list[str]:
    return [r.algorithm, repr(float(r.delta)), str(r.seed), str(r.tau),
            "1" if r.correct else "0", r.outcome, repr(float(r.wall_ms))]


def export_csv(data, path) -> Path:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for r in _records(data):
                writer.writerow(format_csv_row(r))
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def read_csv(path) -> BenchSummary:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = tuple(next(reader))
            if header != CSV_HEADER:
                raise ValidationError(f"{path}: unexpected header {header}")
            records = [EpisodeRecord(a, float(d), int(s), int(t), c == "1", o, float(w))
                       for a, d, s, t, c, o, w in reader]
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    return BenchSummary(records)


def summary_dict(summary: BenchSummary) -> list[dict]:
    out = []
    for s in summary.all_stats():
        out.append({
            "algorithm": s.algorithm, "delta": s.delta, "runs": s.runs,
            "stopped": s.stopped, "timeouts": s.timeouts, "errors": s.errors,
            "mean_tau": s.mean_tau, "error_rate": s.error_rate,
            "quantiles": {str(q): v for q, v in s.quantiles.items()},
            "step_wall_ms": s.step_wall_ms,
        })
    return out


def export_json(summary: BenchSummary, path) -> Path:
    path = Path(path)
    doc = {
        "spec_version": SPEC_VERSION,
        "backend": BACKEND,
        "configs": summary.configs,
        "episodes": [dict(zip(CSV_HEADER, (r.algorithm, r.delta, r.seed, r.tau, r.correct,
                                           r.outcome, r.wall_ms)))
                     for r in summary.records],
        "summary": summary_dict(summary),
    }
    try:
        path.write_text(json.dumps(doc, indent=2, allow_nan=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def plot_data(summary: BenchSummary) -> str:
    """Quantile table per (algorithm, delta), one block each."""
    blocks = []
    for s in summary.all_stats():
        lines = [f"# algorithm={s.algorithm} delta={s.delta!r} runs={s.runs} "
                 f"stopped={s.stopped} mean={s.mean_tau!r}",
                 "quantile,tau"]
        lines += [f"{q!r},{v!r}" for q, v in s.quantiles.items()]
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def export_results(data, path, format: str = "csv") -> Path:
    """Write episodes as CSV, a JSON document, or plot-data quantile tables."""
    if format == "csv":
        return export_csv(data, path)
    summary = data if isinstance(data, BenchSummary) else BenchSummary(_records(data))
    if format == "json":
        return export_json(summary, path)
    if format == "plot-data":
        path = Path(path)
        try:
            path.write_text(plot_data(summary))
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
        return path
    raise ValidationError(f"unknown format {format!r}")


def reference_instance() -> tuple:
    """The four-armed best-arm instance used in the benchmarks."""
    return (1.0, 0.85, 0.8, 0.75)


def make_configs(spec: ProblemSpec, means, rules: Sequence[Union[str, Rule]],
                 deltas: Sequence[float], threshold_kind=ThresholdKind.PRACTICAL,
                 seed: int = 0, max_steps: int = 10_000_000, **sampler_kwargs) -> list[EpisodeConfig]:
    return [EpisodeConfig(spec, tuple(means), SamplerConfig(rule, **sampler_kwargs),
                          ThresholdSpec(threshold_kind, d), seed=seed, max_steps=max_steps)
            for r in rules for d in deltas for rule in [Rule.parse(r)]]
