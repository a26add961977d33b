"""Greedy kernel-deflation selection and the iterative halving loop.

At each halving stage a kernel is built on the current subset from Poincare
distances (the raw distances by default, optionally an RBF of them), and half of the subset is picked greedily: the candidate whose
residual kernel column carries the most energy relative to its regularized
diagonal is selected, then its contribution is deflated out of the residual
kernel with a rank-one update. The picked half becomes the next stage.
"""

from dataclasses import dataclass, field
import math
from typing import List

import numpy as np

from .errors import (
    AlreadySelectedError,
    ConfigError,
    EtaNonPositiveError,
    IndexOutOfRangeError,
    KOutOfRangeError,
    TooManyHalvingsError,
    TooSmallToHalveError,
)
from .geometry import pairwise_distances, restrict

KERNELS = ("rbf", "distance")
GAIN_FLOOR = -1e-9


@dataclass(frozen=True)
class KernelMatrix:
    """Kernel restricted to one subset of the dataset.

    ``H`` holds raw Poincare distances when ``kind == "distance"`` and
    ``exp(-d^2 / (2 bandwidth^2))`` when ``kind == "rbf"``. ``C_diag`` is the
    squared Euclidean norm of each point (diagonal of the Gram regularizer).
    """

    H: np.ndarray
    index_map: np.ndarray
    eta: float
    C_diag: np.ndarray
    kind: str = "distance"
    bandwidth: float = float("nan")

    @property
    def m(self):
        return self.H.shape[0]

    @property
    def eps_abs(self):
        """Absolute denominator floor.

        Scaled by the mean diagonal; for the zero-diagonal distance kernel the
        mean absolute entry is used instead.
        """
        scale = float(np.trace(self.H)) / self.m
        if scale <= 0.0:
            scale = float(np.abs(self.H).mean())
        return max(1e-9 * scale, np.finfo(float).tiny)


@dataclass
class SelectionState:
    """Residual kernel stored as ``exp(log_scale) * residual_H``.

    With a zero-diagonal kernel each deflation divides by a tiny regularized
    pivot, so the residual grows geometrically; keeping the magnitude in
    ``log_scale`` avoids overflow without changing any comparison.
    """

    residual_H: np.ndarray
    log_scale: float = 0.0
    selected: List[int] = field(default_factory=list)
    gains: List[float] = field(default_factory=list)

    @classmethod
    def start(cls, km):
        return cls(np.array(km.H, dtype=float, copy=True))

    def residual(self):
        with np.errstate(over="ignore"):
            return self.residual_H * math.exp(min(self.log_scale, 709.0))

    @property
    def trace(self):
        t = float(np.trace(self.residual_H))
        if t <= 0.0:
            return t
        return math.exp(min(math.log(t) + self.log_scale, 709.7))


@dataclass(frozen=True)
class HalvingTrace:
    """Successive subsets, stage 0 being the surrogate."""

    stages: List[np.ndarray]
    gains: List[np.ndarray]
    bandwidths: List[float]

    @property
    def halving_count(self):
        return len(self.stages) - 1

    @property
    def sizes(self):
        return [len(s) for s in self.stages]

    @property
    def final(self):
        return self.stages[-1]


def median_bandwidth(distances):
    """Median off-diagonal distance, falling back to 1 when degenerate."""
    m = distances.shape[0]
    if m < 2:
        return 1.0
    off = distances[~np.eye(m, dtype=bool)]
    bw = float(np.median(off))
    return bw if bw > 0 else 1.0


def build_kernel(ds, indices, eta, kind="distance", bandwidth="median", dm=None):
    """Kernel on the dataset rows ``indices``.

    ``indices`` may be a Surrogate or any index sequence. ``dm`` is an
    optional full Poincare distance matrix to restrict instead of recomputing.
    """
    if not eta > 0:
        raise EtaNonPositiveError(f"eta must be positive, got {eta}")
    if kind not in KERNELS:
        raise ConfigError(f"unknown kernel {kind!r}")
    idx = np.asarray(getattr(indices, "kept_indices", indices), dtype=np.int64)
    if idx.size == 0 or idx.min() < 0 or idx.max() >= ds.n:
        raise IndexOutOfRangeError("kernel indices must be valid dataset rows")
    if dm is None:
        dist = pairwise_distances(ds.subset(idx), "poincare").values
    else:
        if dm.metric != "poincare":
            raise ConfigError("kernel requires a poincare distance matrix")
        dist = restrict(dm, idx).values
    pts = ds.points[idx]
    c_diag = np.einsum("ij,ij->i", pts, pts)
    if kind == "distance":
        return KernelMatrix(np.array(dist), idx, float(eta), c_diag)
    bw = median_bandwidth(dist) if bandwidth == "median" else float(bandwidth)
    if not bw > 0:
        raise ConfigError("bandwidth must be positive")
    H = np.exp(-(dist ** 2) / (2.0 * bw * bw))
    return KernelMatrix(H, idx, float(eta), c_diag, "rbf", bw)


def _log_pivots(state, km):
    """Log of the scaled denominators ``diag + (eta C + eps) / scale``."""
    reg = np.log(km.eta * km.C_diag + km.eps_abs) - state.log_scale
    with np.errstate(divide="ignore"):
        return np.logaddexp(np.log(np.diag(state.residual_H)), reg)


def _log_gains(state, km):
    R = state.residual_H
    with np.errstate(divide="ignore"):
        log_energy = np.log(np.einsum("ij,ij->j", R, R))
    return state.log_scale + log_energy - _log_pivots(state, km)


def deflation_gain(state, km, candidate):
    """Energy explained by picking ``candidate`` next."""
    if not 0 <= candidate < km.m:
        raise IndexOutOfRangeError(f"candidate {candidate} outside [0, {km.m})")
    if candidate in state.selected:
        raise AlreadySelectedError(f"candidate {candidate} already selected")
    with np.errstate(over="ignore"):
        return float(np.exp(_log_gains(state, km)[candidate]))


def all_gains(state, km):
    """Gains of every candidate; already-selected entries are ``nan``."""
    with np.errstate(over="ignore"):
        gains = np.exp(_log_gains(state, km))
    if state.selected:
        gains[state.selected] = np.nan
    return gains


def deflate(state, km, c):
    """Rank-one update removing candidate ``c`` from the residual kernel."""
    R = state.residual_H
    col = R[:, c].copy()
    log_d = float(_log_pivots(state, km)[c])
    # outer(col, col) is exactly symmetric, so R stays symmetric bit for bit
    if log_d > -600.0:
        R -= np.outer(col, col) / math.exp(log_d)
    else:
        R *= math.exp(log_d)
        R -= np.outer(col, col)
        state.log_scale -= log_d
    diag = np.einsum("ii->i", R)
    np.maximum(diag, 0.0, out=diag)
    peak = float(np.abs(R).max())
    if peak > 0.0:
        # power-of-two rescale is exact
        e = math.frexp(peak)[1]
        R *= 2.0 ** -e
        state.log_scale += e * math.log(2.0)


def greedy_select(km, k, mode="max"):
    """Pick ``k`` local indices by repeated gain-argmax and deflation.

    ``mode="min"`` picks the smallest gain instead; it exists only to compare
    against the literal argmin reading and is not used by the pipeline.
    """
    if not 1 <= k <= km.m:
        raise KOutOfRangeError(f"k={k} outside [1, {km.m}]")
    if mode not in ("max", "min"):
        raise ValueError("mode must be 'max' or 'min'")
    state = SelectionState.start(km)
    taken = np.zeros(km.m, dtype=bool)
    for _ in range(k):
        # compare in log space: the gains themselves may overflow
        lg = _log_gains(state, km)
        free = np.flatnonzero(~taken)
        pick = np.argmax if mode == "max" else np.argmin
        c = int(free[pick(lg[free])])
        taken[c] = True
        with np.errstate(over="ignore"):
            state.gains.append(float(np.exp(lg[c])))
        state.selected.append(c)
        deflate(state, km, c)
    return state


def halve_once(ds, current, eta, kind="distance", bandwidth="median", dm=None):
    """Keep the greedily selected half of ``current``.

    Returns ``(dataset_indices, gains, bandwidth_used)``.
    """
    current = np.asarray(current, dtype=np.int64)
    if len(current) < 2:
        raise TooSmallToHalveError(f"cannot halve a subset of size {len(current)}")
    km = build_kernel(ds, current, eta, kind, bandwidth, dm)
    state = greedy_select(km, len(current) // 2)
    return current[state.selected], np.array(state.gains), km.bandwidth


def halving_sizes(n_prime, l):
    sizes = [int(n_prime)]
    for _ in range(l):
        sizes.append(sizes[-1] // 2)
    return sizes


def run_halving(ds, surrogate, eta, l, kind="distance", bandwidth="median", dm=None):
    """Halve the surrogate ``l`` times; the last stage is the teaching set."""
    stage0 = np.asarray(getattr(surrogate, "kept_indices", surrogate), dtype=np.int64)
    if l < 0:
        raise TooManyHalvingsError("l must be nonnegative")
    if 2 ** l > len(stage0):
        raise TooManyHalvingsError(
            f"{l} halvings need at least {2 ** l} points, surrogate has {len(stage0)}")
    stages = [stage0]
    gains = []
    bandwidths = []
    for _ in range(l):
        nxt, g, bw = halve_once(ds, stages[-1], eta, kind, bandwidth, dm)
        stages.append(nxt)
        gains.append(g)
        bandwidths.append(bw)
    return HalvingTrace(stages, gains, bandwidths)
