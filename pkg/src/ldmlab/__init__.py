"""ldmlab: average-case laboratory for largest-differencing partitioning.

Five routes to the same asymptotics, cross-validated against each other:
direct simulation of the differencing heuristic, the exact rational
branching recursion, its single-path stochastic walk, the deterministic
rate equation, and the continuum series with its saddle-point expansion.
"""

from .analysis_fit import FitResult, ScalingPoint, fit_loglog, naive_fit, scaled_value
from .continuum_series import (
    SCALING_CONSTANT,
    asympt_expansion,
    f_series,
    gamma_eval,
    gamma_recursion_check,
    saddle_point,
)
from .core_ldm import (
    Instance,
    Partition,
    SimConfig,
    brute_force_optimum,
    default_bits,
    ldm,
    pdm,
    pdm_mean,
    sample_mean_ldm,
)
from .exact_recursion import (
    ExpMixture,
    branch_probability,
    enumerate_pdf,
    mean_uniform_scale,
    mixture_mean,
    transition,
)
from .fibonacci_model import boundary_unroll, fib_kk, fib_scaling_curve, genfun_check
from .harness import ExperimentSpec, RunRecord, dispatch, figure_pipeline
from .lambda_walk import draw_k, walk, walk_ensemble
from .rate_equation import contour_field, solve as rate_solve, step as rate_step

__version__ = "0.1.0"

__all__ = [
    "FitResult",
    "ScalingPoint",
    "fit_loglog",
    "naive_fit",
    "scaled_value",
    "SCALING_CONSTANT",
    "asympt_expansion",
    "f_series",
    "gamma_eval",
    "gamma_recursion_check",
    "saddle_point",
    "Instance",
    "Partition",
    "SimConfig",
    "brute_force_optimum",
    "default_bits",
    "ldm",
    "pdm",
    "pdm_mean",
    "sample_mean_ldm",
    "ExpMixture",
    "branch_probability",
    "enumerate_pdf",
    "mean_uniform_scale",
    "mixture_mean",
    "transition",
    "boundary_unroll",
    "fib_kk",
    "fib_scaling_curve",
    "genfun_check",
    "ExperimentSpec",
    "RunRecord",
    "dispatch",
    "figure_pipeline",
    "draw_k",
    "walk",
    "walk_ensemble",
    "contour_field",
    "rate_solve",
    "rate_step",
    "__version__",
]
