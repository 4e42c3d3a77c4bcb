"""Fixed-confidence pure exploration in Gaussian bandits.

Lazy mirror ascent sampling with tracking, classical competitors, GLR
stopping, brute-force oracles and a reproducible Monte-Carlo harness.
"""

from ._accel import BACKEND
from .ascent import AscentState, ascent_step, clip_gradient, exp_weights, force_exploration
from .core import (AgentState, GaussianBandit, RngStream, ValidationError, check_simplex,
                   kl_categorical, kl_gaussian, sample_arm, update_state)
from .harness import (BenchSummary, EpisodeConfig, EpisodeError, EpisodeResult, Trajectory,
                      export_results, read_csv, run_bench, run_episode)
from .problems import (Family, NumericError, ProblemSpec, UndefinedInstanceError, answer,
                       characteristic_time, glr_statistic, gradient_bound, is_decided,
                       subgradient, value_f, w_star)
from .sampling import (Rule, SamplerConfig, best_challenger_select, direct_tracking_select,
                       frank_wolfe_select, initialize, lma_select, track, ttts_select,
                       uniform_select)
from .stopping import (ThresholdKind, ThresholdSpec, decide, mixture_constant,
                       prior_normalizer, should_stop, threshold)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "AscentState", "ascent_step", "clip_gradient", "exp_weights", "force_exploration",
    "AgentState", "GaussianBandit", "RngStream", "ValidationError", "check_simplex",
    "kl_categorical", "kl_gaussian", "sample_arm", "update_state",
    "BenchSummary", "EpisodeConfig", "EpisodeError", "EpisodeResult", "Trajectory",
    "export_results", "read_csv", "run_bench", "run_episode",
    "Family", "NumericError", "ProblemSpec", "UndefinedInstanceError", "answer",
    "characteristic_time", "glr_statistic", "gradient_bound", "is_decided", "subgradient",
    "value_f", "w_star",
    "Rule", "SamplerConfig", "best_challenger_select", "direct_tracking_select",
    "frank_wolfe_select", "initialize", "lma_select", "track", "ttts_select", "uniform_select",
    "ThresholdKind", "ThresholdSpec", "decide", "mixture_constant", "prior_normalizer",
    "should_stop", "threshold",
]
