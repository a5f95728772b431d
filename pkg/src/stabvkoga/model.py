"""Kernel surrogate on selected centers and its error metrics."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .data import Dataset
from .errors import InputError, StabilityError
from .kernels import Kernel, KernelFamily, cross_matrix, kernel_matrix

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Surrogate:
    """``s(x) = sum_i coefficients[i] * k(x, centers[i])`` with vector-valued coefficients."""

    kernel: Kernel
    centers: np.ndarray
    coefficients: np.ndarray
    lam: float = 0.0

    def __post_init__(self):
        # fixed memory layout keeps predictions bit-identical after a JSON round trip
        object.__setattr__(self, "centers", np.ascontiguousarray(self.centers, dtype=float))
        object.__setattr__(self, "coefficients", np.ascontiguousarray(self.coefficients, dtype=float))
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def n_centers(self):
        return self.centers.shape[0]

    @property
    def dim_in(self):
        return self.centers.shape[1]

    @property
    def dim_out(self):
        return self.coefficients.shape[1]

    def __call__(self, X):
        return predict(self, X)

    def to_dict(self):
        return {
            "kernel": self.kernel.family.value,
            "epsilon": self.kernel.epsilon,
            "lambda": self.lam,
            "input_dim": self.dim_in,
            "output_dim": self.dim_out,
            "centers": self.centers.tolist(),
            "coefficients": self.coefficients.tolist(),
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            kernel = Kernel(KernelFamily(doc["kernel"]), doc["epsilon"])
            d, q = int(doc["input_dim"]), int(doc["output_dim"])
            centers = np.array(doc["centers"], dtype=float).reshape(-1, d)
            coef = np.array(doc["coefficients"], dtype=float).reshape(-1, q)
            lam = float(doc["lambda"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed model document: {exc}") from None
        if centers.shape[0] != coef.shape[0]:
            raise InputError("model document has mismatched centers and coefficients")
        return cls(kernel, centers, coef, lam)


def fit(kernel: Kernel, data: Dataset, selected, lam: float = 0.0) -> Surrogate:
    """Solve ``(A + lam * I) alpha = Y`` on the selected centers.

    One Cholesky factorization is shared by all output columns. With an empty
    selection the result is the zero model.
    """
    lam = float(lam)
    if not lam >= 0.0:
        raise InputError(f"lambda must be nonnegative, got {lam}")
    idx = np.asarray(selected, dtype=int).reshape(-1)
    if idx.size and (idx.min() < 0 or idx.max() >= len(data)):
        raise InputError("selected index out of range")
    if np.unique(idx).size != idx.size:
        raise InputError("selected indices contain duplicates")
    centers = data.X[idx]
    Yc = data.Y[idx]
    if idx.size == 0:
        return Surrogate(kernel, centers.reshape(0, data.dim_in), np.zeros((0, data.dim_out)), lam)
    A = kernel_matrix(kernel, centers)
    A[np.diag_indices_from(A)] += lam
    try:
        factor = cho_factor(A, lower=True)
    except LinAlgError as exc:
        lmin = float(np.linalg.eigvalsh(A)[0])
        raise StabilityError(
            f"regularized kernel matrix is not numerically positive definite ({exc}); "
            f"smallest eigenvalue {lmin:.3e}"
        ) from None
    pivots = np.diag(factor[0]) ** 2
    log.debug("fit: %d centers, lambda=%g, smallest pivot %.3e", idx.size, lam, pivots.min())
    coef = cho_solve(factor, Yc)
    return Surrogate(kernel, centers, coef, lam)


def predict(model: Surrogate, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[1] != model.dim_in:
        raise InputError(f"expected points of dimension {model.dim_in}, got shape {X.shape}")
    if model.n_centers == 0:
        return np.zeros((X.shape[0], model.dim_out))
    return cross_matrix(model.kernel, X, model.centers) @ model.coefficients


@dataclass
class MetricsReport:
    """Absolute and relative errors over an evaluation set.

    Relative metrics skip points with ``|y_i| = 0`` unless the prediction there
    is exact (which counts as zero relative error). ``n_relative_skipped``
    counts the skipped points; when every point is skipped the relative
    metrics are None.
    """

    e_max: float
    e_rmse: float
    e_max_rel: float | None
    e_rmse_rel: float | None
    n_points_evaluated: int
    n_relative_skipped: int = 0

    def to_dict(self):
        doc = asdict(self)
        doc.pop("n_relative_skipped")
        return doc


def error_metrics(pred, Y) -> MetricsReport:
    pred = np.asarray(pred, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if pred.shape != Y.shape or Y.ndim != 2:
        raise InputError(f"prediction shape {pred.shape} does not match targets {Y.shape}")
    if Y.shape[0] == 0:
        raise InputError("cannot compute metrics on an empty evaluation set")
    err = np.linalg.norm(pred - Y, axis=1)
    ynorm = np.linalg.norm(Y, axis=1)
    e_max = float(err.max())
    e_rmse = float(math.sqrt(np.mean(err**2)))

    ok = ynorm > 0
    rel = np.zeros_like(err)
    rel[ok] = err[ok] / ynorm[ok]
    usable = ok | (err == 0.0)
    n_skip = int(np.count_nonzero(~usable))
    if n_skip:
        log.warning("relative metrics skip %d point(s) with zero-norm targets", n_skip)
    if usable.any():
        e_max_rel = float(rel[usable].max())
        e_rmse_rel = float(math.sqrt(np.mean(rel[usable] ** 2)))
    else:
        e_max_rel = e_rmse_rel = None
    return MetricsReport(e_max, e_rmse, e_max_rel, e_rmse_rel, int(Y.shape[0]), n_skip)


def metrics(model: Surrogate, data: Dataset) -> MetricsReport:
    """E_max, E_RMSE and their relative versions of ``model`` on ``data``."""
    return error_metrics(predict(model, data.X), data.Y)
