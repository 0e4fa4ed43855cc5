"""Exact eps-series for slow manifolds, fast fibre bundles and timescale cascades."""

from .algebra import EpsSeries, RatFunc, RatMat, Ring
from .cascade import Classification, check_no_infra_slow, run_cascade
from .errors import MathError, NumericError, SlowmaniError, SpecError
from .frontend import Ansatz, ProblemSpec, load_problem, parse_problem_file
from .gspt import build_frame, compute_n0, expand_fibre_bundle, expand_slow_manifold

__version__ = "0.1.0"

__all__ = [
    "Ansatz", "Classification", "EpsSeries", "MathError", "NumericError", "ProblemSpec",
    "RatFunc", "RatMat", "Ring", "SlowmaniError", "SpecError", "build_frame",
    "check_no_infra_slow", "compute_n0", "expand_fibre_bundle", "expand_slow_manifold",
    "load_problem", "parse_problem_file", "run_cascade",
]
