"""Hypersphere density scores and the smooth-boundary surrogate.

Each point is scored by the Gaussian weights of the points inside its
fixed-radius hypersphere (itself included), summed and divided by the dataset
size n: a Parzen estimate with a truncated Gaussian kernel. The surrogate
keeps the ``n_prime`` highest-scoring points; the rest are treated as boundary
perturbations.

Dividing by n rather than by the sphere population matters: a sphere mean
gives an isolated point (whose sphere holds only itself) the largest
possible score.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    IndexOutOfRangeError,
    MetricMismatchError,
    NPrimeOutOfRangeError,
)
from .geometry import METRICS, pairwise_distances


@dataclass(frozen=True)
class DensityConfig:
    radius: float = 0.4
    metric: str = "poincare"
    normalized: bool = False

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigError("radius must be positive")
        if self.metric not in METRICS:
            raise ConfigError(f"unknown metric {self.metric!r}")

    def log_kappa(self, dim):
        """Log of the Gaussian normalizing constant, 0 when unnormalized."""
        if not self.normalized:
            return 0.0
        return -0.5 * dim * math.log(2.0 * math.pi) - dim * math.log(self.radius)


@dataclass(frozen=True)
class DensityProfile:
    """Per-point scores.

    ``scores`` follow ``config.normalized``; ``unnormalized`` is the same
    quantity without the constant factor and is what rankings use, so the
    normalized and unnormalized modes always produce the same ordering.
    """

    scores: np.ndarray
    neighbor_counts: np.ndarray
    config: DensityConfig
    unnormalized: np.ndarray

    @property
    def n(self):
        return len(self.scores)


@dataclass(frozen=True)
class Surrogate:
    """Top-``n_prime`` indices by density, densest first."""

    kept_indices: np.ndarray
    cutoff_score: float
    n_prime: int
    parent_n: int

    @property
    def dropped_indices(self):
        mask = np.ones(self.parent_n, dtype=bool)
        mask[self.kept_indices] = False
        return np.flatnonzero(mask)


def hypersphere_members(center_idx, dm, radius):
    """Indices ``j`` with ``dm[center_idx, j] <= radius`` (always includes the center)."""
    if not 0 <= center_idx < dm.n:
        raise IndexOutOfRangeError(f"index {center_idx} outside [0, {dm.n})")
    if not radius > 0:
        raise ConfigError("radius must be positive")
    return np.flatnonzero(dm.values[center_idx] <= radius)


def density_score(center_idx, dm, config):
    """Return ``(score, neighbor_count)`` for one point."""
    if dm.metric != config.metric:
        raise MetricMismatchError(
            f"distance matrix is {dm.metric}, config asks for {config.metric}")
    members = hypersphere_members(center_idx, dm, config.radius)
    dist = dm.values[center_idx, members]
    raw = np.exp(-0.5 * (dist / config.radius) ** 2).sum() / dm.n
    return float(_scale(raw, config.log_kappa(dm.dim))), len(members)


def _scale(values, log_kappa):
    if log_kappa == 0.0:
        return values
    return np.exp(log_kappa + np.log(values))


def density_profile(ds, config=None, dm=None):
    """Score every point of ``ds``.

    A precomputed distance matrix may be passed to avoid recomputation; its
    metric must match ``config.metric``.
    """
    config = config or DensityConfig()
    if dm is None:
        dm = pairwise_distances(ds, config.metric)
    elif dm.metric != config.metric:
        raise MetricMismatchError(
            f"distance matrix is {dm.metric}, config asks for {config.metric}")
    inside = dm.values <= config.radius
    counts = inside.sum(axis=1)
    weights = np.where(inside, np.exp(-0.5 * (dm.values / config.radius) ** 2), 0.0)
    raw = weights.sum(axis=1) / dm.n
    scores = _scale(raw, config.log_kappa(dm.dim))
    return DensityProfile(scores, counts.astype(np.int64), config, raw)


def default_n_prime(n, frac):
    """``ceil(frac * n)``, robust to float noise such as ``0.95 * 100``."""
    if not 0.0 < frac <= 1.0:
        raise ConfigError("surrogate fraction must lie in (0, 1]")
    return max(1, math.ceil(round(frac * n, 9)))


def rank_by_density(scores):
    """Indices sorted by descending score, ties by ascending index."""
    scores = np.asarray(scores)
    return np.lexsort((np.arange(len(scores)), -scores))


def build_surrogate(profile, n_prime):
    n = profile.n
    if not 1 <= n_prime <= n:
        raise NPrimeOutOfRangeError(f"n_prime={n_prime} outside [1, {n}]")
    kept = rank_by_density(profile.unnormalized)[:n_prime]
    return Surrogate(kept, float(profile.scores[kept[-1]]), int(n_prime), n)
