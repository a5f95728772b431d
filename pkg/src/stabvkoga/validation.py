"""Two-step k-fold cross-validation for base and stabilized greedy surrogates.

Base models search the kernel shape parameter at ``gamma = 0``; stabilized
models keep the base ``epsilon`` and search ``gamma`` instead. Both then
search the ridge parameter ``lambda`` with the first hyperparameter frozen.
The same shuffled folds are reused for every grid cell.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import InputError, StabilityError
from .greedy import Criterion, GreedyConfig, run
from .kernels import Kernel, KernelFamily
from .model import Surrogate, fit, predict

log = logging.getLogger(__name__)


def log_grid(lo: float, hi: float, n: int) -> list:
    """``n`` logarithmically equispaced values from ``lo`` to ``hi`` inclusive."""
    if not (0 < lo < hi) or n < 2:
        raise InputError(f"log grid needs 0 < lo < hi and n >= 2, got lo={lo}, hi={hi}, n={n}")
    vals = np.logspace(math.log10(lo), math.log10(hi), n)
    vals[0], vals[-1] = lo, hi
    return [float(v) for v in vals]


def lin_grid(lo: float, hi: float, n: int) -> list:
    """``n`` equispaced values from ``lo`` to ``hi`` inclusive."""
    if not lo < hi or n < 2:
        raise InputError(f"linear grid needs lo < hi and n >= 2, got lo={lo}, hi={hi}, n={n}")
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def kfold_split(n: int, k: int, seed: int) -> list:
    """Seeded shuffled partition of ``range(n)`` into ``k`` near-equal folds."""
    if k < 2:
        raise InputError(f"need at least 2 folds, got {k}")
    if n < k:
        raise InputError(f"cannot split {n} points into {k} folds")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(f) for f in np.array_split(perm, k)]


class SearchMode(str, enum.Enum):
    BASE = "base"
    STABILIZED = "stabilized"


@dataclass
class SearchConfig:
    """Grids and protocol settings. Defaults follow the published experiment."""

    k_folds: int = 5
    eps_grid: list = field(default_factory=lambda: log_grid(1e-2, 1e1, 20))
    gamma_grid: list = field(default_factory=lambda: lin_grid(0.0, 1.0, 11))
    lambda_grid: list = field(default_factory=lambda: log_grid(1e-16, 1e3, 20))
    criterion: Criterion = Criterion.F_GREEDY
    kernel: KernelFamily = KernelFamily.LINEAR_MATERN
    seed: int = 0
    tau_f: float = 1e-7
    tau_p: float = 1e-3
    max_points: int | None = None

    def __post_init__(self):
        self.criterion = Criterion(self.criterion)
        self.kernel = KernelFamily(self.kernel)
        self.k_folds = int(self.k_folds)
        for name in ("eps_grid", "gamma_grid", "lambda_grid"):
            grid = [float(v) for v in getattr(self, name)]
            if not grid:
                raise InputError(f"{name} is empty")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise InputError(f"{name} must be strictly ascending")
            setattr(self, name, grid)
        if self.eps_grid[0] <= 0:
            raise InputError("eps_grid values must be positive")
        if self.gamma_grid[0] < 0 or self.gamma_grid[-1] > 1:
            raise InputError("gamma_grid values must lie in [0, 1]")
        if self.lambda_grid[0] < 0:
            raise InputError("lambda_grid values must be nonnegative")

    def greedy_config(self, gamma: float) -> GreedyConfig:
        return GreedyConfig(self.criterion, gamma, self.tau_f, self.tau_p, self.max_points)


@dataclass
class CVScore:
    mean_rmse: float
    fold_rmse: list
    n_selected: list
    flagged: list

    @property
    def mean_selected(self):
        return float(np.mean(self.n_selected))


@dataclass
class CVRow:
    step: str
    param_name: str
    param_value: float
    fold: int
    e_rmse: float
    n_selected: int


CV_TABLE_COLUMNS = ("step", "param_name", "param_value", "fold", "e_rmse", "n_selected")


def _fold_train(n, fold):
    mask = np.ones(n, dtype=bool)
    mask[fold] = False
    return np.flatnonzero(mask)


def select_folds(kernel: Kernel, data: Dataset, folds, config: GreedyConfig) -> list:
    """Greedy selection on every fold's training part; indices refer to ``data``."""
    out = []
    for fold in folds:
        train = _fold_train(len(data), fold)
        res = run(kernel, data.subset(train), config)
        out.append(train[np.asarray(res.selected, dtype=int)])
    return out


def score_folds(kernel: Kernel, data: Dataset, folds, selections, lam: float) -> CVScore:
    """Fit on each fold's selected centers and score E_RMSE on the held-out fold."""
    rmse, counts, flagged = [], [], []
    for i, (fold, sel) in enumerate(zip(folds, selections)):
        held = data.subset(fold)
        counts.append(int(len(sel)))
        if len(sel) == 0:
            log.info("fold %d selected no points; scoring the zero model", i)
            flagged.append(i)
        try:
            model = fit(kernel, data, sel, lam)
        except StabilityError as exc:
            log.warning("fold %d: %s", i, exc)
            flagged.append(i)
            rmse.append(math.inf)
            continue
        err = predict(model, held.X) - held.Y
        rmse.append(float(math.sqrt(np.mean(np.sum(err**2, axis=1)))))
    return CVScore(float(np.mean(rmse)), rmse, counts, flagged)


def cv_score(kernel: Kernel, gamma: float, lam: float, data: Dataset, folds, config: SearchConfig) -> CVScore:
    """Mean held-out E_RMSE of greedy selection plus ridge fit over ``folds``."""
    selections = select_folds(kernel, data, folds, config.greedy_config(gamma))
    return score_folds(kernel, data, folds, selections, lam)


@dataclass
class SearchResult:
    mode: SearchMode
    best_eps: float
    best_gamma: float
    best_lambda: float
    n_selected_final: int
    final_model: Surrogate
    stop_reason: str
    cv_table: list
    mean_scores: dict

    def to_dict(self):
        return {
            "mode": self.mode.value,
            "best_eps": self.best_eps,
            "best_gamma": self.best_gamma,
            "best_lambda": self.best_lambda,
            "n_selected_final": self.n_selected_final,
            "stop_reason": self.stop_reason,
            "mean_scores": self.mean_scores,
            "final_model": self.final_model.to_dict(),
        }


def _best(grid, scores):
    # strict < keeps the smallest grid value on ties
    best_i = 0
    for i, s in enumerate(scores):
        if s < scores[best_i]:
            best_i = i
    return grid[best_i]


def _record(table, step, name, value, score: CVScore):
    for f, (e, n) in enumerate(zip(score.fold_rmse, score.n_selected)):
        table.append(CVRow(step, name, float(value), f, float(e), int(n)))


def two_step_search(
    data: Dataset,
    config: SearchConfig,
    mode=SearchMode.BASE,
    eps_override: float | None = None,
) -> SearchResult:
    """Run the two-step search and refit the winner on all of ``data``.

    The first step (``epsilon`` for base, ``gamma`` for stabilized) is scored
    with ``lambda = 0``. Stabilized mode requires ``eps_override``, normally
    the base search's ``best_eps``.
    """
    mode = SearchMode(mode)
    folds = kfold_split(len(data), config.k_folds, config.seed)
    table, means = [], {}
    tag = mode.value

    if mode is SearchMode.BASE:
        gamma = 0.0
        step1 = []
        for eps in config.eps_grid:
            s = cv_score(Kernel(config.kernel, eps), gamma, 0.0, data, folds, config)
            _record(table, f"{tag}_eps", "eps", eps, s)
            step1.append(s.mean_rmse)
        eps = _best(config.eps_grid, step1)
        means["eps"] = step1
    else:
        if eps_override is None:
            raise InputError("stabilized search needs the base model's epsilon")
        eps = float(eps_override)
        kernel = Kernel(config.kernel, eps)
        step1 = []
        for g in config.gamma_grid:
            s = cv_score(kernel, g, 0.0, data, folds, config)
            _record(table, f"{tag}_gamma", "gamma", g, s)
            step1.append(s.mean_rmse)
        gamma = _best(config.gamma_grid, step1)
        means["gamma"] = step1

    kernel = Kernel(config.kernel, eps)
    # selection does not depend on lambda, so it is computed once per fold
    selections = select_folds(kernel, data, folds, config.greedy_config(gamma))
    step2 = []
    for lam in config.lambda_grid:
        s = score_folds(kernel, data, folds, selections, lam)
        _record(table, f"{tag}_lambda", "lambda", lam, s)
        step2.append(s.mean_rmse)
    lam = _best(config.lambda_grid, step2)
    means["lambda"] = step2

    final = run(kernel, data, config.greedy_config(gamma))
    model = fit(kernel, data, final.selected, lam)
    log.info("%s search: eps=%g gamma=%g lambda=%g, %d centers", tag, eps, gamma, lam, len(final.selected))
    return SearchResult(
        mode=mode,
        best_eps=float(eps),
        best_gamma=float(gamma),
        best_lambda=float(lam),
        n_selected_final=len(final.selected),
        final_model=model,
        stop_reason=final.stop_reason.value,
        cv_table=table,
        mean_scores=means,
    )
