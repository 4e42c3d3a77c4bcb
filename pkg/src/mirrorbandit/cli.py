"""Command-line interface: ``run``, ``bench``, ``wstar`` and ``plot-data``.

Every flag may also be given in a JSON file passed with ``--config``; keys
are the flag names with dashes replaced by underscores.  Flags on the
command line override the file.  Exit status is 0 on success, 1 on invalid
input and 2 when a run fails.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import harness, oracle
from ._accel import BACKEND
from .core import ValidationError
from .problems import (Family, NumericError, ProblemSpec, UndefinedInstanceError,
                       characteristic_time, w_star)
from .sampling import Rule, SamplerConfig
from .stopping import ThresholdKind, ThresholdSpec

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2

DEFAULTS = {
    "problem": "best-arm",
    "means": "1,0.85,0.8,0.75",
    "threshold_value": None,
    "delta": "0.1",
    "rule": "LMA",
    "episodes": 100,
    "seed": 0,
    "threshold_kind": "practical",
    "max_steps": 10_000_000,
    "out": None,
    "format": None,
    "parallelism": 1,
    "episode": 0,
    "stride": 0,
    "c_eta": None,
    "gamma_scale": 0.25,
    "clip": None,
    "c_tilde": 0.0,
    "oracle": False,
    "oracle_step": 0.005,
    "input": None,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


def _add_common(p: argparse.ArgumentParser, multi: bool):
    p.add_argument("--config", help="JSON file with default values for any flag")
    p.add_argument("--problem", help="thresholding, best-arm or signed")
    p.add_argument("--means", help="comma-separated true means")
    p.add_argument("--threshold-value", type=float, help="threshold of thresholding/signed problems")
    p.add_argument("--delta", help="confidence level" + (" (comma list)" if multi else ""))
    p.add_argument("--rule", help="sampling rule" + (" (comma list)" if multi else "")
                   + ": LMA, LMAc, BC, DT, TTTS, Unif, FW")
    p.add_argument("--seed", type=int)
    p.add_argument("--threshold-kind", help="practical or theoretical")
    p.add_argument("--c-tilde", type=float, help="additive constant of the theoretical threshold")
    p.add_argument("--max-steps", type=int)
    p.add_argument("--c-eta", type=float, help="learning-rate scale (default: instance-based)")
    p.add_argument("--gamma-scale", type=float, help="forced-exploration scale")
    p.add_argument("--clip", type=float, help="gradient clip constant (default: none)")
    p.add_argument("--out", help="output file")
    p.add_argument("--format", help="output format")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mirrorbandit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="store_true", help="print version and backend")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("run", help="run a single episode")
    _add_common(p, multi=False)
    p.add_argument("--episode", type=int, help="episode index (random stream)")
    p.add_argument("--stride", type=int, help="record a trajectory row every N steps (0: off)")

    p = sub.add_parser("bench", help="Monte-Carlo runs over rules and confidence levels")
    _add_common(p, multi=True)
    p.add_argument("--episodes", type=int, help="episodes per (rule, delta)")
    p.add_argument("--parallelism", type=int, help="worker threads")

    p = sub.add_parser("wstar", help="optimal proportions and characteristic time")
    _add_common(p, multi=True)
    p.add_argument("--oracle", action="store_true", default=None,
                   help="also run the brute-force grid search")
    p.add_argument("--oracle-step", type=float, help="grid step of the oracle")

    p = sub.add_parser("plot-data", help="quantile tables of the stopping time")
    _add_common(p, multi=True)
    p.add_argument("--input", help="episode CSV written by bench (skips simulation)")
    p.add_argument("--episodes", type=int)
    p.add_argument("--parallelism", type=int)
    return parser


def _options(args: argparse.Namespace) -> dict:
    opts = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config {args.config} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ValidationError("config file must hold a JSON object")
        unknown = set(data) - set(DEFAULTS)
        if unknown:
            raise ValidationError(f"unknown config keys: {', '.join(sorted(unknown))}")
        opts.update(data)
    for key, value in vars(args).items():
        if key in DEFAULTS and value is not None:
            opts[key] = value
    return opts


def _floats(value, name) -> list[float]:
    if isinstance(value, (int, float)):
        return [float(value)]
    if isinstance(value, list):
        items = value
    else:
        items = [s for s in str(value).split(",") if s.strip()]
    try:
        return [float(x) for x in items]
    except ValueError:
        raise ValidationError(f"{name} must be comma-separated numbers, got {value!r}") from None


def _names(value) -> list[str]:
    if isinstance(value, list):
        return [str(v) for v in value]
    return [s.strip() for s in str(value).split(",") if s.strip()]


def _spec(opts) -> ProblemSpec:
    family = Family.parse(opts["problem"])
    if family == Family.BEST_ARM:
        return ProblemSpec(family)
    if opts["threshold_value"] is None:
        raise ValidationError(f"--threshold-value is required for {family.name.lower()}")
    return ProblemSpec(family, float(opts["threshold_value"]))


def _configs(opts, single: bool = False) -> list[harness.EpisodeConfig]:
    spec = _spec(opts)
    means = tuple(_floats(opts["means"], "means"))
    rules = [Rule.parse(r) for r in _names(opts["rule"])]
    deltas = _floats(opts["delta"], "delta")
    if single and (len(rules) != 1 or len(deltas) != 1):
        raise ValidationError("run takes a single rule and a single delta")
    clip = math.inf if opts["clip"] is None else float(opts["clip"])
    return [
        harness.EpisodeConfig(
            spec, means,
            SamplerConfig(rule, c_eta=opts["c_eta"], gamma_scale=float(opts["gamma_scale"]), clip=clip),
            ThresholdSpec(ThresholdKind.parse(opts["threshold_kind"]), d, float(opts["c_tilde"])),
            seed=int(opts["seed"]), max_steps=int(opts["max_steps"]),
            stride=int(opts["stride"]) if single else 0,
        )
        for rule in rules for d in deltas
    ]


def _emit(text: str, out):
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def cmd_run(opts) -> int:
    (config,) = _configs(opts, single=True)
    result = harness.run_episode(config, int(opts["episode"]))
    fmt = opts["format"] or "text"
    if fmt == "json":
        doc = {"spec_version": harness.SPEC_VERSION, "config": config.to_dict(),
               "result": result.to_dict()}
        if result.trajectory is not None:
            tr = result.trajectory
            doc["trajectory"] = {
                "t": tr.t.tolist(), "glr": tr.glr.tolist(), "mu_hat": tr.mu_hat.tolist(),
                "w_tilde": np.where(np.isnan(tr.w_tilde), None, tr.w_tilde).tolist(),
                "w_prime": np.where(np.isnan(tr.w_prime), None, tr.w_prime).tolist(),
                "counts": tr.counts.tolist(),
            }
        _emit(json.dumps(doc, indent=2) + "\n", opts["out"])
    elif fmt == "text":
        d = result.to_dict()
        lines = [f"{k}: {d[k]}" for k in ("algorithm", "delta", "seed", "stream", "tau",
                                          "outcome", "decision", "correct", "counts")]
        lines.append(f"wall_ms: {d['wall_ms']:.3f}")
        lines.append("diagnostics: " + ", ".join(f"{k}={v}" for k, v in d["diagnostics"].items()))
        _emit("\n".join(lines) + "\n", opts["out"])
    else:
        raise ValidationError(f"run supports --format text or json, not {fmt!r}")
    return EXIT_OK


def _bench(opts) -> harness.BenchSummary:
    return harness.run_bench(_configs(opts), int(opts["episodes"]), int(opts["parallelism"]))


def cmd_bench(opts) -> int:
    fmt = opts["format"] or "csv"
    if fmt not in ("csv", "json", "plot-data"):
        raise ValidationError(f"bench supports --format csv, json or plot-data, not {fmt!r}")
    summary = _bench(opts)
    if opts["out"]:
        harness.export_results(summary, opts["out"], fmt)
        print(summary.table(), file=sys.stderr)
    elif fmt == "csv":
        w = sys.stdout
        w.write(",".join(harness.CSV_HEADER) + "\n")
        for r in summary.records:
            w.write(",".join(harness.format_csv_row(r)) + "\n")
    elif fmt == "plot-data":
        sys.stdout.write(harness.plot_data(summary))
    else:
        sys.stdout.write(json.dumps({"spec_version": harness.SPEC_VERSION,
                                     "summary": harness.summary_dict(summary)}, indent=2) + "\n")
    return EXIT_OK


def cmd_wstar(opts) -> int:
    spec = _spec(opts)
    mu = np.array(_floats(opts["means"], "means"))
    start = time.perf_counter()
    w = w_star(spec, mu)
    T = characteristic_time(spec, mu)
    doc = {"w_star": w.tolist(), "T_star": T,
           "T_star_log_inv_delta": {repr(d): T * math.log(1 / d) for d in _floats(opts["delta"], "delta")}}
    if opts["oracle"]:
        step = float(opts["oracle_step"])
        wg = oracle.grid_w_star(spec, mu, step)
        doc["oracle"] = {"step": step, "w_grid": wg.tolist(),
                         "max_abs_diff": float(np.max(np.abs(wg - w)))}
    doc["seconds"] = time.perf_counter() - start
    if (opts["format"] or "text") == "json":
        _emit(json.dumps(doc, indent=2) + "\n", opts["out"])
        return EXIT_OK
    lines = ["w*: " + " ".join(f"{x:.6f}" for x in w), f"T*: {T:.6f}"]
    lines += [f"T* log(1/{d}): {v:.3f}" for d, v in doc["T_star_log_inv_delta"].items()]
    if "oracle" in doc:
        o = doc["oracle"]
        lines.append(f"grid (step {o['step']}): " + " ".join(f"{x:.4f}" for x in o["w_grid"]))
        lines.append(f"max |grid - w*|: {o['max_abs_diff']:.4f}")
    _emit("\n".join(lines) + "\n", opts["out"])
    return EXIT_OK


def cmd_plot_data(opts) -> int:
    if opts["input"]:
        summary = harness.read_csv(opts["input"])
    else:
        summary = _bench(opts)
    fmt = opts["format"] or "text"
    if fmt == "json":
        _emit(json.dumps({"spec_version": harness.SPEC_VERSION,
                          "summary": harness.summary_dict(summary)}, indent=2) + "\n", opts["out"])
    elif fmt == "text":
        _emit(harness.plot_data(summary), opts["out"])
    else:
        raise ValidationError(f"plot-data supports --format text or json, not {fmt!r}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "bench": cmd_bench, "wstar": cmd_wstar, "plot-data": cmd_plot_data}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.version:
        from . import __version__
        print(f"mirrorbandit {__version__} ({BACKEND} backend)")
        return EXIT_OK
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_INVALID
    try:
        return COMMANDS[args.command](_options(args))
    except (ValidationError, UndefinedInstanceError, oracle.UnsupportedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericError, harness.EpisodeError, OSError, RuntimeError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
