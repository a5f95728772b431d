"""Stabilized vectorial greedy kernel approximation.

Greedy selection of interpolation points under f-, P- and f/P-criteria,
restricted to candidates whose power-function value is at least ``gamma``
times the current maximum, followed by an optionally regularized kernel fit.
"""

__version__ = "0.1.0"

from .data import Dataset, load_csv, synth
from .errors import InputError, ParseError, StabilityError
from .greedy import Criterion, GreedyConfig, GreedyState, StopReason, extend, indicator, init_state, oracle_power, restricted_argmax, run
from .kernels import Kernel, KernelFamily, cross_matrix, eval_kernel, kernel_matrix
from .model import MetricsReport, Surrogate, fit, metrics, predict

__all__ = [
    "Criterion",
    "Dataset",
    "GreedyConfig",
    "GreedyState",
    "InputError",
    "Kernel",
    "KernelFamily",
    "MetricsReport",
    "ParseError",
    "StabilityError",
    "StopReason",
    "Surrogate",
    "cross_matrix",
    "eval_kernel",
    "extend",
    "fit",
    "indicator",
    "init_state",
    "kernel_matrix",
    "load_csv",
    "metrics",
    "oracle_power",
    "predict",
    "restricted_argmax",
    "run",
    "synth",
]
