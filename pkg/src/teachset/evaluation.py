"""Evaluation harness: partition agreement, stand-in student risks, risk
curves against teaching cost, the importance-weighted risk estimator and the
1-D threshold label-complexity demo."""

import math
from dataclasses import dataclass, field, replace
from typing import List

import numpy as np

from .errors import (
    ConfigError,
    EmptyTrainingError,
    EpsilonOutOfRangeError,
    LengthMismatchError,
    NoLabelsError,
    ProbBelowFloorError,
)
from .halving import run_halving
from .teaching import (
    TeachingConfig,
    halvings_for_target,
    kmedoids_reduce,
    prepare,
)

STRATEGIES = ("teaching", "random", "kmedoids")

REFERENCE_ACTIVE_QUERIES = 13
REFERENCE_PASSIVE_SAMPLES = 10_000


# -- partition agreement --------------------------------------------------

def _contingency(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatchError(f"partitions of lengths {a.shape} and {b.shape}")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)
    return table


def _comb2(x):
    x = np.asarray(x, dtype=float)
    return x * (x - 1.0) / 2.0


def adjusted_rand_index(a, b):
    """Hubert-Arabie adjusted Rand index of two labelings."""
    table = _contingency(a, b)
    n = table.sum()
    sum_cells = _comb2(table).sum()
    sum_a = _comb2(table.sum(axis=1)).sum()
    sum_b = _comb2(table.sum(axis=0)).sum()
    total = _comb2(n)
    if total == 0:
        return 1.0
    expected = sum_a * sum_b / total
    max_index = 0.5 * (sum_a + sum_b)
    if max_index == expected:
        # both trivial (all singletons or one cluster each): identical structure
        return 1.0
    return float((sum_cells - expected) / (max_index - expected))


def mutual_information(a, b):
    """Mutual information of two labelings, in nats."""
    table = _contingency(a, b).astype(float)
    n = table.sum()
    pa = table.sum(axis=1) / n
    pb = table.sum(axis=0) / n
    nz = table > 0
    pij = table[nz] / n
    outer = np.outer(pa, pb)[nz]
    return float(max(0.0, np.sum(pij * np.log(pij / outer))))


# -- stand-in student -----------------------------------------------------

def nearest_centroid_predict(train_idx, ds):
    if ds.labels is None:
        raise NoLabelsError("dataset has no labels")
    train_idx = np.asarray(train_idx, dtype=np.int64)
    if train_idx.size == 0:
        raise EmptyTrainingError("training subset is empty")
    y = ds.labels[train_idx]
    classes = np.unique(y)
    centroids = np.stack([ds.points[train_idx[y == c]].mean(axis=0) for c in classes])
    diff = ds.points[:, None, :] - centroids[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    return classes[np.argmin(d2, axis=1)]


def nearest_centroid_risk(train_idx, ds):
    """0-1 error over the full dataset of a nearest-centroid fit on ``train_idx``."""
    pred = nearest_centroid_predict(train_idx, ds)
    return float(np.mean(pred != ds.labels))


@dataclass(frozen=True)
class RiskReport:
    costs: List[int]
    risks: List[float]
    learner: str
    baseline_risk: float
    strategy: str
    subset_risks: List[float] = field(default_factory=list)

    def to_dict(self):
        return {
            "strategy": self.strategy,
            "learner": self.learner,
            "baseline_risk": self.baseline_risk,
            "costs": list(self.costs),
            "risks": list(self.risks),
            "subset_risks": list(self.subset_risks),
        }


def teaching_subsets(ds, costs, config=None, dm=None):
    """Teaching sets for several costs from a single halving run.

    Stage ``j`` of the halving trace does not depend on how many stages are
    run, so this matches calling ``teach`` once per cost in target mode.
    """
    costs = [int(c) for c in costs]
    config = config or TeachingConfig(halvings=0)
    base = replace(config, halvings=0, target_size=None)
    dm, profile, surrogate, kernel_dm = prepare(ds, base, dm)
    levels = [halvings_for_target(surrogate.n_prime, c) for c in costs]
    trace = run_halving(ds, surrogate, base.eta, max(levels, default=0),
                        base.kernel, base.bandwidth, kernel_dm)
    subsets = []
    for c, l in zip(costs, levels):
        stage = trace.stages[l]
        if len(stage) > c:
            stage = kmedoids_reduce(ds, stage, c, base.metric, base.seed,
                                    profile.unnormalized, base.radius)
        subsets.append(np.asarray(stage, dtype=np.int64))
    return subsets


def risk_curve(ds, strategy, costs, config=None, seed=0):
    """Risk disagreement ``|R(subset) - R(full)|`` of the nearest-centroid
    student at each teaching cost."""
    if strategy not in STRATEGIES:
        raise ConfigError(f"unknown strategy {strategy!r}")
    costs = [int(c) for c in costs]
    if any(c < 1 or c > ds.n for c in costs):
        raise ConfigError(f"costs must lie in [1, {ds.n}]")
    if costs != sorted(costs):
        raise ConfigError("costs must be ascending")
    config = config or TeachingConfig(halvings=0)
    baseline = nearest_centroid_risk(np.arange(ds.n), ds)
    if strategy == "teaching":
        subsets = teaching_subsets(ds, costs, config)
    elif strategy == "random":
        rng = np.random.default_rng(seed)
        subsets = [rng.choice(ds.n, size=c, replace=False) for c in costs]
    else:
        dm, profile, _, _ = prepare(ds, replace(config, halvings=0, target_size=None))
        subsets = [kmedoids_reduce(ds, np.arange(ds.n), c, config.metric, seed,
                                   profile.unnormalized, config.radius)
                   for c in costs]
    subset_risks = [nearest_centroid_risk(s, ds) for s in subsets]
    risks = [abs(r - baseline) for r in subset_risks]
    return RiskReport(costs, risks, "nearest_centroid", baseline, strategy, subset_risks)


# -- importance weighting -------------------------------------------------

@dataclass(frozen=True)
class ImportanceSamplingRun:
    probs: np.ndarray
    draws: np.ndarray
    losses: np.ndarray
    prob_floor: float = 1e-12

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        q = np.asarray(self.draws)
        f = np.asarray(self.losses, dtype=float)
        if not (p.shape == q.shape == f.shape) or p.ndim != 1 or p.size == 0:
            raise LengthMismatchError("probs, draws and losses need equal positive length")
        if not 0.0 < self.prob_floor <= 1.0:
            raise ConfigError("prob_floor must lie in (0, 1]")
        if np.any(p < self.prob_floor) or np.any(p > 1.0):
            raise ProbBelowFloorError(f"probabilities must lie in [{self.prob_floor}, 1]")
        if not np.all((q == 0) | (q == 1)):
            raise ConfigError("draws must be 0 or 1")
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "draws", q.astype(np.int64))
        object.__setattr__(self, "losses", f)

    @property
    def T(self):
        return len(self.probs)


def importance_weighted_risk(run):
    """``(1/T) * sum_t q_t / p_t * f_t``."""
    return float(np.sum(run.draws / run.probs * run.losses) / run.T)


# -- threshold demo -------------------------------------------------------

@dataclass(frozen=True)
class ThresholdDemoResult:
    epsilon: float
    passive_queries: int
    active_queries: int
    teaching_examples: int
    passive_error: float
    active_error: float
    teaching_error: float
    active_query_bound: int
    reference_active_queries: int = REFERENCE_ACTIVE_QUERIES
    reference_passive_samples: int = REFERENCE_PASSIVE_SAMPLES

    @property
    def achieved_errors(self):
        return (self.passive_error, self.active_error, self.teaching_error)


def _label(x, theta):
    return np.where(np.asarray(x) >= theta, 1, -1)


def passive_threshold(n, rng, theta=0.0):
    """Threshold estimate from ``n`` uniform labeled draws on [-1, 1].

    The estimate is the midpoint of the innermost opposite-label pair; an
    empty side falls back to the interval endpoint.
    """
    x = rng.uniform(-1.0, 1.0, size=n)
    y = _label(x, theta)
    left = x[y < 0].max() if np.any(y < 0) else -1.0
    right = x[y > 0].min() if np.any(y > 0) else 1.0
    return 0.5 * (left + right)


def active_threshold(epsilon, theta=0.0):
    """Binary search on [-1, 1] until the half-width is at most ``epsilon``.

    Returns ``(estimate, queries)``.
    """
    lo, hi = -1.0, 1.0
    queries = 0
    while (hi - lo) / 2.0 > epsilon:
        mid = 0.5 * (lo + hi)
        queries += 1
        if _label(mid, theta) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi), queries


def teacher_threshold(epsilon, theta=0.0):
    """The two examples a teacher who knows ``theta`` would hand over."""
    a, b = theta - epsilon / 2.0, theta + epsilon / 2.0
    return [(a, -1), (b, +1)], 0.5 * (a + b)


def threshold_demo(epsilon, n_passive=REFERENCE_PASSIVE_SAMPLES, seed=0):
    if not 0.0 < epsilon < 1.0:
        raise EpsilonOutOfRangeError(f"epsilon must lie in (0, 1), got {epsilon}")
    theta = 0.0
    rng = np.random.default_rng(seed)
    passive = passive_threshold(int(n_passive), rng, theta)
    active, queries = active_threshold(epsilon, theta)
    examples, taught = teacher_threshold(epsilon, theta)
    return ThresholdDemoResult(
        epsilon=float(epsilon),
        passive_queries=int(n_passive),
        active_queries=queries,
        teaching_examples=len(examples),
        passive_error=abs(passive - theta),
        active_error=abs(active - theta),
        teaching_error=abs(taught - theta),
        active_query_bound=math.ceil(math.log2(2.0 / epsilon)),
    )


def passive_median_error(n_passive, seeds):
    """Median passive-learner error over independent seeds."""
    errs = [abs(passive_threshold(int(n_passive), np.random.default_rng(s)))
            for s in seeds]
    return float(np.median(errs))
