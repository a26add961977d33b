"""Deterministic PAM k-medoids on a precomputed distance matrix."""

from dataclasses import dataclass
from typing import List

import numpy as np

from .errors import KExceedsPoolError

MAX_ITER = 100


@dataclass(frozen=True)
class PamResult:
    medoids: np.ndarray        # local indices, in medoid-slot order
    labels: np.ndarray         # slot of the nearest medoid for every point
    cost_history: List[float]  # total within-cluster distance after each step

    @property
    def cost(self):
        return self.cost_history[-1]


def farthest_first(dist, k, start):
    """Greedy farthest-first seeding from ``start``; ties go to the lower index."""
    medoids = [int(start)]
    nearest = dist[start].copy()
    for _ in range(1, k):
        cand = nearest.copy()
        cand[medoids] = -np.inf
        j = int(np.argmax(cand))
        medoids.append(j)
        np.minimum(nearest, dist[j], out=nearest)
    return medoids


def _assign(dist, medoids):
    block = dist[:, medoids]
    labels = np.argmin(block, axis=1)
    return labels, float(block[np.arange(len(dist)), labels].sum())


def pam(dist, k, init):
    """Partition around medoids with steepest-descent swaps.

    Each iteration evaluates every (medoid, non-medoid) swap and applies the
    one with the largest cost reduction; ties are resolved by medoid slot,
    then by candidate index. Stops when no swap improves or after
    ``MAX_ITER`` iterations.
    """
    dist = np.asarray(dist, dtype=float)
    p = dist.shape[0]
    if not 1 <= k <= p:
        raise KExceedsPoolError(f"k={k} exceeds pool of {p}")
    medoids = np.array(init, dtype=np.int64)
    labels, cost = _assign(dist, medoids)
    history = [cost]
    for _ in range(MAX_ITER):
        if k == p:
            break
        block = dist[:, medoids]
        order = np.argsort(block, axis=1, kind="stable")
        d1 = block[np.arange(p), order[:, 0]]
        d2 = block[np.arange(p), order[:, 1]] if k > 1 else np.full(p, np.inf)
        is_medoid = np.zeros(p, dtype=bool)
        is_medoid[medoids] = True
        best = (0.0, -1, -1)
        for slot in range(k):
            # cost change of replacing medoid `slot` by each candidate h
            base = np.where(order[:, 0] == slot, d2, d1)
            new = np.minimum(dist, base[:, None])   # rows: points, cols: h
            delta = new.sum(axis=0) - d1.sum()
            delta[is_medoid] = np.inf
            h = int(np.argmin(delta))
            if delta[h] < best[0] - 1e-12 * max(1.0, abs(cost)):
                best = (float(delta[h]), slot, h)
        if best[1] < 0:
            break
        medoids[best[1]] = best[2]
        labels, cost = _assign(dist, medoids)
        history.append(cost)
    return PamResult(medoids, labels, history)
