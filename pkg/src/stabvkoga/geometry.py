"""Point-distribution quantities: fill and separation distance, smallest eigenvalue.

The domain is always the discrete candidate set, so the supremum in the fill
distance is a maximum over candidates. Distances are brute-force pairwise.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .errors import InputError
from .kernels import Kernel, kernel_matrix


def _points(P, name):
    P = np.asarray(P, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    if P.ndim != 2:
        raise InputError(f"{name} must be a 2-d array of points")
    return P


def fill_distance(selected, candidates) -> float:
    """Largest distance from a candidate to its nearest selected point."""
    S = _points(selected, "selected")
    C = _points(candidates, "candidates")
    if S.shape[0] == 0:
        raise InputError("fill distance needs at least one selected point")
    return float(cdist(C, S).min(axis=1).max())


def separation_distance(selected) -> float:
    """Smallest pairwise distance; 0 if the set contains duplicates."""
    S = _points(selected, "selected")
    if S.shape[0] < 2:
        raise InputError("separation distance needs at least two points")
    return float(pdist(S).min())


def smallest_eigenvalue(kernel: Kernel, selected) -> float:
    S = _points(selected, "selected")
    if S.shape[0] == 0:
        raise InputError("smallest eigenvalue needs at least one point")
    return float(np.linalg.eigvalsh(kernel_matrix(kernel, S))[0])


def decay_slope(series) -> float:
    """Least-squares slope of ``log(value)`` against ``log(N)``.

    Parameters
    ----------
    series : sequence of (N, value) pairs
        At least three pairs with positive N and value.
    """
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 3:
        raise InputError("decay slope needs at least three (N, value) pairs")
    if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
        raise InputError("decay slope needs positive finite N and values")
    logn, logv = np.log(arr[:, 0]), np.log(arr[:, 1])
    logn_c = logn - logn.mean()
    return float(np.dot(logn_c, logv - logv.mean()) / np.dot(logn_c, logn_c))


@dataclass
class GeometryReport:
    h: float
    q: float | None
    rho: float | None
    lambda_min: float

    def to_dict(self):
        return asdict(self)


def geometry_report(kernel: Kernel, selected, candidates) -> GeometryReport:
    """Fill/separation distances, their ratio, and ``lambda_min`` of the kernel matrix.

    ``q`` and ``rho`` are None for a single selected point.
    """
    S = _points(selected, "selected")
    h = fill_distance(S, candidates)
    if S.shape[0] >= 2:
        q = separation_distance(S)
        rho = h / q if q > 0 else float("inf")
    else:
        q = rho = None
    return GeometryReport(h=h, q=q, rho=rho, lambda_min=smallest_eigenvalue(kernel, S))
