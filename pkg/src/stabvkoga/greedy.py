"""Greedy selection of interpolation points with gamma-restricted criteria.

The selected subspace is tracked through its Newton basis: an orthonormal
basis of ``span{k(., x_i) : x_i selected}`` evaluated at every candidate. One
extension costs O(N * M) for N selected points and M candidates and updates
the squared power function and the vectorial residual in place.

All output components share the same points (separable kernel ``k(x, y) * I``),
so the residual is an ``M x q`` array while the power function is scalar.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .data import Dataset
from .errors import InputError, StabilityError
from .kernels import Kernel, cross_matrix, kernel_matrix

log = logging.getLogger(__name__)


class Criterion(str, enum.Enum):
    F_GREEDY = "f"
    P_GREEDY = "p"
    FP_GREEDY = "fp"


class StopReason(str, enum.Enum):
    ALL_SELECTED = "all_selected"
    RESIDUAL = "residual_tolerance"
    POWER = "power_tolerance"
    MAX_POINTS = "max_points"
    STABILITY = "stability"


@dataclass
class GreedyConfig:
    """Selection rule and stopping tolerances.

    ``gamma = 0`` is the unrestricted algorithm, ``gamma = 1`` reduces every
    criterion to P-greedy. ``max_points = None`` means no cap beyond the
    candidate count.
    """

    criterion: Criterion = Criterion.F_GREEDY
    gamma: float = 0.0
    tau_f: float = 1e-7
    tau_p: float = 1e-3
    max_points: int | None = None

    def __post_init__(self):
        try:
            self.criterion = Criterion(self.criterion)
        except ValueError:
            raise InputError(f"unknown criterion {self.criterion!r}") from None
        self.gamma = float(self.gamma)
        if not 0.0 <= self.gamma <= 1.0:
            raise InputError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not self.tau_f > 0 or not self.tau_p > 0:
            raise InputError("tau_f and tau_p must be positive")
        if self.max_points is not None:
            self.max_points = int(self.max_points)
            if self.max_points < 1:
                raise InputError("max_points must be a positive integer")


@dataclass
class TraceRecord:
    iteration: int
    chosen_index: int
    power_at_chosen: float
    max_residual_norm: float
    rmse: float
    max_power: float = float("nan")


TRACE_COLUMNS = ("iteration", "chosen_index", "power_at_chosen", "max_residual_norm", "rmse")


@dataclass(eq=False)
class GreedyState:
    """Mutable state of one greedy run over a fixed candidate set."""

    X: np.ndarray
    Y: np.ndarray
    selected: list
    power_sq: np.ndarray
    residual: np.ndarray
    trace: list = field(default_factory=list)
    _newton: np.ndarray = field(default=None, repr=False)
    _coef: np.ndarray = field(default=None, repr=False)
    _mask: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        m, q = self.residual.shape
        if self._newton is None:
            self._newton = np.empty((min(m, 16), m))
        if self._coef is None:
            self._coef = np.empty((min(m, 16), q))
        if self._mask is None:
            self._mask = np.zeros(m, dtype=bool)
            self._mask[list(self.selected)] = True

    @property
    def n_candidates(self):
        return self.X.shape[0]

    @property
    def n_selected(self):
        return len(self.selected)

    @property
    def selected_mask(self):
        return self._mask

    @property
    def newton_values(self):
        """``N x M`` array; row j is the j-th Newton basis function at all candidates."""
        return self._newton[: self.n_selected]

    @property
    def newton_coefficients(self):
        """``N x q`` expansion coefficients of the interpolant in the Newton basis."""
        return self._coef[: self.n_selected]

    @property
    def power(self):
        return np.sqrt(self.power_sq)

    def residual_norms(self):
        return np.linalg.norm(self.residual, axis=1)

    def max_residual_norm(self):
        return float(self.residual_norms().max())

    def rmse(self):
        return float(np.sqrt(np.mean(np.sum(self.residual**2, axis=1))))

    def _grow(self):
        cap = self._newton.shape[0]
        if self.n_selected < cap:
            return
        new_cap = min(2 * cap, self.n_candidates)
        newton = np.empty((new_cap, self.n_candidates))
        newton[:cap] = self._newton
        coef = np.empty((new_cap, self._coef.shape[1]))
        coef[:cap] = self._coef
        self._newton, self._coef = newton, coef


def init_state(kernel: Kernel, data: Dataset) -> GreedyState:
    """Empty selection: power equals ``sqrt(k(x, x))`` and residual equals the data."""
    if len(data) < 1:
        raise InputError("cannot run greedy selection on an empty dataset")
    X, Y = data.X, data.Y
    # k(x, x) = phi(0) for radial kernels
    diag = np.full(X.shape[0], float(kernel.phi(0.0)))
    return GreedyState(X=X, Y=Y, selected=[], power_sq=diag, residual=Y.astype(float).copy())


def indicator(state: GreedyState, criterion) -> np.ndarray:
    """Per-candidate selection indicator for ``criterion``."""
    criterion = Criterion(criterion)
    if criterion is Criterion.P_GREEDY:
        return np.sqrt(state.power_sq)
    res = state.residual_norms()
    if criterion is Criterion.F_GREEDY:
        return res
    p = np.sqrt(state.power_sq)
    out = np.zeros_like(res)
    pos = p > 0
    out[pos] = res[pos] / p[pos]
    return out


def restricted_set(state: GreedyState, gamma: float) -> np.ndarray:
    """Boolean mask of candidates with ``P(x) >= gamma * max P``."""
    p = np.sqrt(state.power_sq)
    return p >= gamma * p.max()


def restricted_argmax(state: GreedyState, config: GreedyConfig) -> int:
    """Index of the next point: indicator argmax over the restricted set.

    Already-selected candidates are never returned. Ties go to the smallest
    index. With ``gamma = 1`` the rule is exactly P-greedy, including its tie
    break, so every criterion yields the same sequence.
    """
    free = ~state.selected_mask
    if not free.any():
        raise RuntimeError("no unselected candidate left")
    if config.gamma >= 1.0:
        eta = indicator(state, Criterion.P_GREEDY)
        allowed = free
    else:
        eta = indicator(state, config.criterion)
        allowed = free & restricted_set(state, config.gamma)
    masked = np.where(allowed, eta, -np.inf)
    return int(np.argmax(masked))


def extend(state: GreedyState, kernel: Kernel, new_index: int) -> GreedyState:
    """Add candidate ``new_index`` and update power, residual and trace in place."""
    new_index = int(new_index)
    if not 0 <= new_index < state.n_candidates:
        raise InputError(f"candidate index {new_index} out of range")
    if state.selected_mask[new_index]:
        raise InputError(f"candidate {new_index} is already selected")
    p2 = float(state.power_sq[new_index])
    if not p2 > 0.0:
        raise StabilityError(
            f"power function vanishes at candidate {new_index} (P^2 = {p2:.3e}); "
            "point is numerically dependent on the selected set"
        )
    p = np.sqrt(p2)
    n = state.n_selected
    state._grow()
    V = state._newton[:n]
    kcol = cross_matrix(kernel, state.X, state.X[new_index : new_index + 1])[:, 0]
    v = (kcol - V.T @ V[:, new_index]) / p
    c = state.residual[new_index] / p

    state._newton[n] = v
    state._coef[n] = c
    state.residual -= np.outer(v, c)
    state.power_sq -= v**2
    np.maximum(state.power_sq, 0.0, out=state.power_sq)
    state.selected.append(new_index)
    state._mask[new_index] = True
    state.power_sq[state._mask] = 0.0

    state.trace.append(
        TraceRecord(
            iteration=n + 1,
            chosen_index=new_index,
            power_at_chosen=float(p),
            max_residual_norm=state.max_residual_norm(),
            rmse=state.rmse(),
            max_power=float(np.sqrt(state.power_sq.max())),
        )
    )
    return state


@dataclass
class GreedyResult:
    selected: list
    trace: list
    stop_reason: StopReason
    state: GreedyState


def run(kernel: Kernel, data: Dataset, config: GreedyConfig) -> GreedyResult:
    """Select points until a stopping rule fires.

    Stopping rules are checked at the top of each iteration, in order: all
    candidates taken, ``max_points`` reached, max residual norm below
    ``tau_f``. The point picked by :func:`restricted_argmax` is then rejected
    (and the run stops) if its power value is below ``tau_p``.
    """
    state = init_state(kernel, data)
    m = state.n_candidates
    cap = m if config.max_points is None else min(config.max_points, m)
    while True:
        if state.n_selected >= m:
            reason = StopReason.ALL_SELECTED
            break
        if state.n_selected >= cap:
            reason = StopReason.MAX_POINTS
            break
        if state.max_residual_norm() < config.tau_f:
            reason = StopReason.RESIDUAL
            break
        idx = restricted_argmax(state, config)
        if np.sqrt(state.power_sq[idx]) < config.tau_p:
            reason = StopReason.POWER
            break
        try:
            extend(state, kernel, idx)
        except StabilityError as exc:
            log.warning("greedy run stopped: %s", exc)
            reason = StopReason.STABILITY
            break
    log.debug("greedy stop after %d points: %s", state.n_selected, reason.value)
    return GreedyResult(selected=list(state.selected), trace=list(state.trace), stop_reason=reason, state=state)


def oracle_power(kernel: Kernel, selected_points, x):
    """Power function by direct dense solve, for checking the incremental path.

    ``P(x)^2 = k(x, x) - v^T A^{-1} v`` with ``A`` the kernel matrix on the
    selected points and ``v = k(X, x)``. Accepts a single point (returns a
    float) or an array of points (returns an array).
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1
    pts = np.asarray(selected_points, dtype=float)
    if single:
        x = x.reshape(1, -1)
    if pts.size == 0:
        out = np.full(x.shape[0], np.sqrt(kernel.phi(0.0)))
        return float(out[0]) if single else out
    if pts.ndim == 1:
        pts = pts.reshape(-1, x.shape[1])
    A = kernel_matrix(kernel, pts)
    try:
        factor = cho_factor(A, lower=True)
    except LinAlgError:
        raise InputError("kernel matrix on the selected points is singular (duplicate points?)") from None
    V = cross_matrix(kernel, pts, x)
    p2 = kernel.phi(0.0) - np.sum(V * cho_solve(factor, V), axis=0)
    out = np.sqrt(np.maximum(p2, 0.0))
    # exact zero on the selected points themselves
    hit = (x[:, None, :] == pts[None, :, :]).all(axis=2).any(axis=1)
    out[hit] = 0.0
    return float(out[0]) if single else out
