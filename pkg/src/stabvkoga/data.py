"""Datasets: CSV ingestion, synthetic targets, seeded train/test split."""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputError, ParseError

_COLUMN_RE = re.compile(r"^([xy])(\d+)$")

GENERATORS = ("franke-vec", "stiffness-like", "zero")


@dataclass
class Dataset:
    """Paired inputs ``X`` (M x d) and outputs ``Y`` (M x q)."""

    X: np.ndarray
    Y: np.ndarray
    x_names: list = field(default=None)
    y_names: list = field(default=None)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        Y = np.asarray(self.Y, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if Y.ndim == 1:
            Y = Y[:, None]
        if X.ndim != 2 or Y.ndim != 2:
            raise InputError("X and Y must be 2-d arrays")
        if X.shape[0] != Y.shape[0]:
            raise InputError(f"row counts differ: X has {X.shape[0]}, Y has {Y.shape[0]}")
        if X.shape[0] < 1:
            raise InputError("dataset is empty")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise InputError("dataset contains non-finite values")
        self.X, self.Y = X, Y
        if self.x_names is None:
            self.x_names = [f"x{i}" for i in range(X.shape[1])]
        if self.y_names is None:
            self.y_names = [f"y{i}" for i in range(Y.shape[1])]

    def __len__(self):
        return self.X.shape[0]

    @property
    def dim_in(self):
        return self.X.shape[1]

    @property
    def dim_out(self):
        return self.Y.shape[1]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=int)
        return Dataset(self.X[idx], self.Y[idx], list(self.x_names), list(self.y_names))


def format_float(v) -> str:
    """Shortest round-trip decimal form of a float."""
    return repr(float(v))


def _parse_header(header):
    cols = {"x": {}, "y": {}}
    for j, name in enumerate(header):
        name = name.strip()
        m = _COLUMN_RE.match(name)
        if m is None:
            raise ParseError(f"unexpected column name {name!r}", row=1, column=name)
        kind, k = m.group(1), int(m.group(2))
        if k in cols[kind]:
            raise ParseError(f"duplicate column {name!r}", row=1, column=name)
        cols[kind][k] = j
    for kind in "xy":
        n = len(cols[kind])
        missing = [f"{kind}{k}" for k in range(n) if k not in cols[kind]]
        if missing:
            raise ParseError(f"missing column {missing[0]!r}", row=1, column=missing[0])
    return [cols["x"][k] for k in range(len(cols["x"]))], [cols["y"][k] for k in range(len(cols["y"]))]


def read_points_csv(path, require_y=True):
    """Parse a CSV with ``x0..x{d-1}`` and optionally ``y0..y{q-1}`` columns.

    Returns ``(X, Y)`` where ``Y`` is None when no y columns are present and
    ``require_y`` is False. No scaling of any kind is applied.
    """
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ParseError(f"cannot open {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path} is empty") from None
        xcols, ycols = _parse_header(header)
        if not xcols:
            raise ParseError("no input columns (x0, x1, ...)", row=1)
        if require_y and not ycols:
            raise ParseError("no output columns (y0, y1, ...)", row=1)
        names = [h.strip() for h in header]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} cells, got {len(row)}", row=lineno)
            vals = []
            for name, cell in zip(names, row):
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(f"non-numeric cell {cell!r}", row=lineno, column=name) from None
                if not math.isfinite(v):
                    raise ParseError(f"non-finite cell {cell!r}", row=lineno, column=name)
                vals.append(v)
            rows.append(vals)
    if not rows:
        raise ParseError(f"{path} has a header but no data rows")
    table = np.array(rows, dtype=float)
    X = table[:, xcols]
    Y = table[:, ycols] if ycols else None
    return X, Y


def load_csv(path) -> Dataset:
    """Load a dataset from CSV; see :func:`read_points_csv` for the format."""
    X, Y = read_points_csv(path, require_y=True)
    return Dataset(X, Y)


def write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])


def save_csv(data: Dataset, path):
    cols = [f"x{i}" for i in range(data.dim_in)] + [f"y{i}" for i in range(data.dim_out)]
    write_csv(path, cols, np.hstack([data.X, data.Y]).tolist())


def _franke_nd(u):
    """Franke's test function extended to ``d`` dimensions on ``[0, 1]^d``."""
    t = 9.0 * u
    d = u.shape[1]
    c1 = np.where(np.arange(d) % 2 == 0, 7.0, 3.0)
    c2 = np.where(np.arange(d) % 2 == 0, 4.0, 7.0)
    t1 = 0.75 * np.exp(-np.sum((t - 2.0) ** 2, axis=1) / 4.0)
    t2 = 0.75 * np.exp(-((t[:, 0] + 1.0) ** 2) / 49.0 - np.sum(t[:, 1:] + 1.0, axis=1) / 10.0)
    t3 = 0.5 * np.exp(-np.sum((t - c1) ** 2, axis=1) / 4.0)
    t4 = -0.2 * np.exp(-np.sum((t - c2) ** 2, axis=1))
    return t1 + t2 + t3 + t4


def franke_vec(X, q):
    """Smooth oscillatory vector field on ``[-1, 1]^d`` with ``q`` components."""
    u = (X + 1.0) / 2.0
    out = np.empty((X.shape[0], q))
    for j in range(q):
        # each output sees a cyclically shifted coordinate order plus a ripple
        shifted = np.roll(u, -j, axis=1)
        ripple = 0.1 * np.sin(np.pi * (j + 2) * np.sum(u, axis=1))
        out[:, j] = _franke_nd(shifted) + ripple
    return out


def stiffness_like(X, q):
    d = X.shape[1]
    out = np.empty((X.shape[0], q))
    for j in range(q):
        a = X[:, j % d]
        b = X[:, (j + 1) % d]
        # exponential stiffening toward |x| = 1, weak coupling to a second axis
        out[:, j] = np.sinh(4.0 * a) / np.sinh(4.0) + 0.25 * b + 0.1 * a * b**2
    return out


def synth(generator: str, n: int, d: int, q: int, seed: int = 0) -> Dataset:
    """Synthetic dataset with inputs uniform in ``[-1, 1]^d``.

    Parameters
    ----------
    generator : {"franke-vec", "stiffness-like", "zero"}
        ``franke-vec`` gives smooth oscillatory components, ``stiffness-like``
        smooth monotone components that steepen sharply near the boundary,
        ``zero`` identically vanishing outputs.
    n, d, q : int
        Number of points, input and output dimension.
    seed : int
        Seed for the input sample.
    """
    if generator not in GENERATORS:
        raise InputError(f"unknown generator {generator!r}; choose from {', '.join(GENERATORS)}")
    if n < 1 or d < 1 or q < 1:
        raise InputError("n, d and q must all be >= 1")
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1.0, 1.0, size=(n, d))
    if generator == "zero":
        Y = np.zeros((n, q))
    elif generator == "franke-vec":
        Y = franke_vec(X, q)
    else:
        Y = stiffness_like(X, q)
    return Dataset(X, Y)


def train_test_split(n: int, train_fraction: float, seed: int):
    """Seeded shuffle, then the first ``round(train_fraction * n)`` indices train."""
    if not 0.0 < train_fraction <= 1.0:
        raise InputError(f"train fraction must be in (0, 1], got {train_fraction}")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = max(1, int(round(train_fraction * n)))
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])
