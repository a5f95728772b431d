"""Radial kernels and kernel matrix assembly.

Both kernels are normalized radial functions, ``k(x, y) = phi(eps * |x - y|)``
with ``phi(0) = 1``:

* Gaussian: ``phi(r) = exp(-r**2)``
* linear Matern: ``phi(r) = (1 + r) * exp(-r)``
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InputError


class KernelFamily(str, enum.Enum):
    GAUSSIAN = "gaussian"
    LINEAR_MATERN = "linmatern"


def _phi_gaussian(r):
    return np.exp(-(r**2))


def _phi_linear_matern(r):
    return (1.0 + r) * np.exp(-r)


_PHI = {
    KernelFamily.GAUSSIAN: _phi_gaussian,
    KernelFamily.LINEAR_MATERN: _phi_linear_matern,
}


@dataclass(frozen=True)
class Kernel:
    """Radial kernel with shape parameter ``epsilon``.

    Parameters
    ----------
    family : KernelFamily or str
        ``"gaussian"`` or ``"linmatern"``.
    epsilon : float
        Positive shape parameter; larger values give narrower kernels.
    """

    family: KernelFamily
    epsilon: float

    def __post_init__(self):
        try:
            family = KernelFamily(self.family)
        except ValueError:
            raise InputError(f"unknown kernel family {self.family!r}") from None
        object.__setattr__(self, "family", family)
        eps = float(self.epsilon)
        if not np.isfinite(eps) or eps <= 0:
            raise InputError(f"kernel epsilon must be positive, got {self.epsilon!r}")
        object.__setattr__(self, "epsilon", eps)

    def phi(self, r):
        """Radial profile evaluated at the scaled distance ``r``."""
        return _PHI[self.family](r)

    def __call__(self, x, y):
        return eval_kernel(self, x, y)


def _as_points(X, name="X"):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise InputError(f"{name} must be a 2-d array of points, got shape {X.shape}")
    return X


def eval_kernel(kernel: Kernel, x, y) -> float:
    """Evaluate ``k(x, y)`` for two single points."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape or x.ndim != 1:
        raise InputError(f"point dimensions differ: {x.shape} vs {y.shape}")
    r = kernel.epsilon * float(np.sqrt(np.sum((x - y) ** 2)))
    return float(kernel.phi(r))


def cross_matrix(kernel: Kernel, X, Z) -> np.ndarray:
    """Kernel values between two point sets, shape ``(len(X), len(Z))``."""
    X = _as_points(X, "X")
    Z = _as_points(Z, "Z")
    if X.shape[1] != Z.shape[1]:
        raise InputError(f"point dimensions differ: {X.shape[1]} vs {Z.shape[1]}")
    if X.shape[0] == 0 or Z.shape[0] == 0:
        return np.zeros((X.shape[0], Z.shape[0]))
    return kernel.phi(kernel.epsilon * cdist(X, Z))


def kernel_matrix(kernel: Kernel, X) -> np.ndarray:
    """Symmetric kernel matrix ``A[i, j] = k(x_i, x_j)`` with unit diagonal."""
    X = _as_points(X, "X")
    if X.shape[0] == 0:
        raise InputError("kernel matrix needs at least one point")
    return cross_matrix(kernel, X, X)
