"""Empirical rates for greedy point sets: power decay, eigenvalue decay, uniformity.

For a Sobolev-equivalent kernel of smoothness ``tau`` in ``d`` dimensions,
gamma-stabilized selection gives ``max P_N ~ N**(1/2 - tau/d)``,
``lambda_min ~ N**(1 - 2 tau/d)`` and a bounded ``h_N / q_N``. This module
runs the selection and measures those quantities; it does not prove anything.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .data import Dataset
from .errors import InputError
from .geometry import decay_slope, smallest_eigenvalue
from .greedy import Criterion, GreedyConfig, extend, init_state, restricted_argmax
from .kernels import Kernel


def uniform_grid(n_per_axis: int, d: int, lo: float = -1.0, hi: float = 1.0) -> np.ndarray:
    """Tensor grid with ``n_per_axis**d`` points, last axis varying fastest."""
    if n_per_axis < 1 or d < 1:
        raise InputError("grid needs n_per_axis >= 1 and d >= 1")
    axis = np.linspace(lo, hi, n_per_axis)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass
class TheoryReport:
    kernel: str
    epsilon: float
    dim: int
    n_candidates: int
    criterion: str
    gamma: float
    n: list = field(default_factory=list)
    power_max: list = field(default_factory=list)
    lambda_min: list = field(default_factory=list)
    fill_distance: list = field(default_factory=list)
    separation_distance: list = field(default_factory=list)
    rho: list = field(default_factory=list)
    power_slope: float | None = None
    lambda_slope: float | None = None
    rho_max: float | None = None
    eig_power_ratio_range: list | None = None
    smoothness: float | None = None
    expected_power_slope: float | None = None
    expected_lambda_slope: float | None = None
    stopped_early: bool = False

    def to_dict(self):
        return dict(self.__dict__)


def study(
    kernel: Kernel,
    X,
    n_min: int = 20,
    n_max: int = 200,
    criterion=Criterion.P_GREEDY,
    gamma: float = 1.0,
    Y=None,
    tau_p: float = 1e-3,
    smoothness: float | None = None,
) -> TheoryReport:
    """Greedily select up to ``n_max`` points from ``X`` and record rates.

    Quantities are recorded for every N in ``[n_min, n_max]``. Targets ``Y``
    matter only for the f- and f/P-criteria; without them a zero target is
    used. No residual stop is applied, only the power stop ``tau_p``.

    ``smoothness`` is the Sobolev order of the kernel's native space; when
    given, the predicted slopes are reported next to the fitted ones.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise InputError("candidate points must be a 2-d array")
    if not 1 <= n_min < n_max:
        raise InputError("need 1 <= n_min < n_max")
    if n_max > X.shape[0]:
        raise InputError(f"n_max={n_max} exceeds the {X.shape[0]} candidates")
    if Y is None:
        Y = np.zeros((X.shape[0], 1))
    config = GreedyConfig(criterion=criterion, gamma=gamma, tau_p=tau_p)
    state = init_state(kernel, Dataset(X, Y))
    report = TheoryReport(
        kernel=kernel.family.value,
        epsilon=kernel.epsilon,
        dim=X.shape[1],
        n_candidates=X.shape[0],
        criterion=config.criterion.value,
        gamma=config.gamma,
        smoothness=smoothness,
    )
    # running nearest-selected distance per candidate, and running separation
    nearest = np.full(X.shape[0], np.inf)
    sep = np.inf
    for n in range(1, n_max + 1):
        idx = restricted_argmax(state, config)
        if np.sqrt(state.power_sq[idx]) < tau_p:
            report.stopped_early = True
            break
        if state.n_selected:
            sep = min(sep, float(cdist(X[idx : idx + 1], X[state.selected]).min()))
        extend(state, kernel, idx)
        nearest = np.minimum(nearest, cdist(X, X[idx : idx + 1])[:, 0])
        if n < n_min:
            continue
        h = float(nearest.max())
        report.n.append(n)
        report.power_max.append(float(np.sqrt(state.power_sq.max())))
        report.lambda_min.append(smallest_eigenvalue(kernel, X[state.selected]))
        report.fill_distance.append(h)
        report.separation_distance.append(sep)
        report.rho.append(h / sep if sep > 0 else float("inf"))

    if len(report.n) >= 3:
        report.power_slope = decay_slope(list(zip(report.n, report.power_max)))
        if min(report.lambda_min) > 0:
            report.lambda_slope = decay_slope(list(zip(report.n, report.lambda_min)))
        report.rho_max = max(report.rho)
        ratio = np.array(report.lambda_min) / np.array(report.power_max) ** 2
        report.eig_power_ratio_range = [float(ratio.min()), float(ratio.max())]
    if smoothness is not None:
        d = X.shape[1]
        report.expected_power_slope = 0.5 - smoothness / d
        report.expected_lambda_slope = 1.0 - 2.0 * smoothness / d
    return report
