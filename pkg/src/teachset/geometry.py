"""Unit-ball feature space and the two distances used for ranking.

Raw rows are mapped into the open unit (Poincare) ball by one global positive
scale factor. Distances are then either hyperbolic (Poincare) or plain
Euclidean.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._parallel import map_blocks
from .errors import (
    DimensionMismatchError,
    EmptyDatasetError,
    NonFiniteInputError,
    PointOutsideBallError,
    RaggedRowsError,
)

METRICS = ("poincare", "euclidean")
DEFAULT_MAX_NORM = 0.999


@dataclass(frozen=True)
class BallDataset:
    """Rows scaled into the open unit ball.

    Attributes
    ----------
    points : ndarray, shape (n, dim)
        ``raw_rows * scale_factor`` (after optional centering).
    labels : ndarray of int or None
    scale_factor : float
        Positive factor applied to every row.
    offset : ndarray or None
        Column means subtracted before scaling when centering was requested.
    """

    points: np.ndarray
    labels: Optional[np.ndarray]
    scale_factor: float
    offset: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise EmptyDatasetError("dataset has no rows")
        if not np.all(np.isfinite(pts)):
            raise NonFiniteInputError("points contain NaN or Inf")
        if np.any(np.linalg.norm(pts, axis=1) >= 1.0):
            raise PointOutsideBallError("every point must satisfy ||x|| < 1")
        if self.labels is not None and len(self.labels) != pts.shape[0]:
            raise DimensionMismatchError(
                f"{len(self.labels)} labels for {pts.shape[0]} points")
        if not self.scale_factor > 0:
            raise ValueError("scale_factor must be positive")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    def subset(self, indices):
        """Rows ``indices`` as a new dataset sharing the scale record."""
        idx = np.asarray(indices, dtype=np.int64)
        labels = None if self.labels is None else self.labels[idx]
        return BallDataset(self.points[idx], labels, self.scale_factor, self.offset)


@dataclass(frozen=True)
class DistanceMatrix:
    values: np.ndarray
    metric: str
    dim: int

    @property
    def n(self):
        return self.values.shape[0]


def _as_rows(raw_rows):
    if raw_rows is None or len(raw_rows) == 0:
        raise EmptyDatasetError("no input rows")
    if isinstance(raw_rows, np.ndarray):
        if raw_rows.ndim != 2:
            raise RaggedRowsError("expected a 2-D array of rows")
        rows = raw_rows.astype(float)
    else:
        widths = {len(r) for r in raw_rows}
        if len(widths) != 1:
            raise RaggedRowsError(f"rows have differing lengths {sorted(widths)}")
        rows = np.array([list(r) for r in raw_rows], dtype=float)
    if rows.shape[1] == 0:
        raise EmptyDatasetError("rows have no columns")
    if not np.all(np.isfinite(rows)):
        raise NonFiniteInputError("input contains NaN or Inf")
    return rows


def project_to_ball(raw_rows, target_max_norm=DEFAULT_MAX_NORM, labels=None,
                    center=False):
    """Scale rows by one positive factor so the largest norm is ``target_max_norm``.

    Row order is preserved. With ``center=True`` the column means are
    subtracted first (off by default).
    """
    if not 0.0 < target_max_norm < 1.0:
        raise ValueError("target_max_norm must lie in (0, 1)")
    rows = _as_rows(raw_rows)
    offset = None
    if center:
        offset = rows.mean(axis=0)
        rows = rows - offset
    max_norm = float(np.max(np.linalg.norm(rows, axis=1)))
    if max_norm == 0.0:
        factor = 1.0
    else:
        factor = target_max_norm / max_norm
        # rounding can push the largest norm a few ulps over the target
        while np.max(np.linalg.norm(rows * factor, axis=1)) > target_max_norm:
            factor = float(np.nextafter(factor, 0.0))
    return BallDataset(rows * factor, labels, factor, offset)


def _check_in_ball(x, name):
    x = np.asarray(x, dtype=float)
    sq = float(np.dot(x, x))
    if not np.isfinite(sq) or sq >= 1.0:
        raise PointOutsideBallError(f"{name} has norm >= 1 (norm^2 = {sq!r})")
    return x, sq


def _arccosh1p(z):
    """arccosh(1 + z) for z >= 0, accurate for small z."""
    return np.log1p(z + np.sqrt(z * (z + 2.0)))


def poincare_distance(u, v):
    """Hyperbolic distance between two points of the open unit ball."""
    u, su = _check_in_ball(u, "u")
    v, sv = _check_in_ball(v, "v")
    if u.shape != v.shape:
        raise DimensionMismatchError(f"shapes {u.shape} and {v.shape} differ")
    diff = u - v
    z = 2.0 * float(np.dot(diff, diff)) / ((1.0 - su) * (1.0 - sv))
    return float(_arccosh1p(z))


def euclidean_distance(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise DimensionMismatchError(f"shapes {u.shape} and {v.shape} differ")
    diff = u - v
    return float(np.sqrt(np.dot(diff, diff)))


def _pairwise_values(points, metric, rows=None, cols=None):
    """Dense distances between ``points[rows]`` and ``points[cols]``.

    Each entry depends only on its own pair, which makes the result
    independent of how the rows are blocked.
    """
    rows = np.arange(len(points)) if rows is None else np.asarray(rows)
    cols = np.arange(len(points)) if cols is None else np.asarray(cols)
    a = points[rows]
    b = points[cols]
    out = np.empty((len(rows), len(cols)))
    if metric == "poincare":
        sa = 1.0 - np.einsum("ij,ij->i", a, a)
        sb = 1.0 - np.einsum("ij,ij->i", b, b)

    def block(s, e):
        diff = a[s:e, None, :] - b[None, :, :]
        sq = np.einsum("ijk,ijk->ij", diff, diff)
        if metric == "poincare":
            out[s:e] = _arccosh1p(2.0 * sq / (sa[s:e, None] * sb[None, :]))
        else:
            out[s:e] = np.sqrt(sq)

    step = max(1, min(256, 2_000_000 // max(1, len(cols) * points.shape[1])))
    map_blocks(block, len(rows), block=step)
    return out


def pairwise_distances(ds, metric="poincare"):
    """All-pairs distance matrix of a dataset."""
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    values = _pairwise_values(ds.points, metric)
    np.fill_diagonal(values, 0.0)
    values.setflags(write=False)
    return DistanceMatrix(values, metric, ds.dim)


def restrict(dm, indices):
    """Sub-matrix of ``dm`` on ``indices`` (rows and columns)."""
    idx = np.asarray(indices, dtype=np.int64)
    values = dm.values[np.ix_(idx, idx)]
    values.setflags(write=False)
    return DistanceMatrix(values, dm.metric, dm.dim)
