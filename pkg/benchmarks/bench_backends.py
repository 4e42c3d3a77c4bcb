"""Per-step cost of each sampling rule under the compiled and plain-numpy backends.

Each backend runs in its own interpreter because the backend is fixed at
import time by ``MIRRORBANDIT_DISABLE_NUMBA``.  Both backends play the same
episodes (same seeds), so the stopping times printed side by side must match.

    python3 benchmarks/bench_backends.py [--episodes 20] [--numpy-episodes 3]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
from mirrorbandit import BACKEND, EpisodeConfig, ProblemSpec, SamplerConfig, run_episode
rules, episodes = sys.argv[1].split(","), int(sys.argv[2])
spec = ProblemSpec.best_arm()
means = (1.0, 0.85, 0.8, 0.75)
# compile outside the timed region
run_episode(EpisodeConfig(spec, means, SamplerConfig("LMA"), max_steps=10))
out = {"backend": BACKEND, "rules": {}}
for rule in rules:
    cfg = EpisodeConfig(spec, means, SamplerConfig(rule), seed=1)
    run_episode(EpisodeConfig(spec, means, SamplerConfig(rule), max_steps=10))
    taus, wall = [], 0.0
    for e in range(episodes):
        r = run_episode(cfg, e)
        taus.append(r.tau)
        wall += r.wall_time
    out["rules"][rule] = {"taus": taus, "us_per_step": 1e6 * wall / sum(taus)}
print(json.dumps(out))
"""


def run_backend(disable: bool, rules, episodes) -> dict:
    env = dict(os.environ)
    env.pop("MIRRORBANDIT_DISABLE_NUMBA", None)
    if disable:
        env["MIRRORBANDIT_DISABLE_NUMBA"] = "1"
    proc = subprocess.run([sys.executable, "-c", WORKER, ",".join(rules), str(episodes)],
                          env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rules", default="LMA,LMAc,BC,DT,TTTS,Unif")
    ap.add_argument("--episodes", type=int, default=20)
    ap.add_argument("--numpy-episodes", type=int, default=3)
    args = ap.parse_args()
    rules = args.rules.split(",")
    fast = run_backend(False, rules, args.episodes)
    slow = run_backend(True, rules, args.numpy_episodes)
    print(f"{'rule':>6} {fast['backend'] + ' us/step':>16} {slow['backend'] + ' us/step':>16} "
          f"{'speedup':>8}  same taus")
    for rule in rules:
        f, s = fast["rules"][rule], slow["rules"][rule]
        n = len(s["taus"])
        same = f["taus"][:n] == s["taus"]
        print(f"{rule:>6} {f['us_per_step']:>16.2f} {s['us_per_step']:>16.2f} "
              f"{s['us_per_step'] / f['us_per_step']:>8.1f}  {same}")


if __name__ == "__main__":
    main()
