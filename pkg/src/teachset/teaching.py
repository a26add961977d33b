"""End-to-end teaching-set pipeline.

project -> density -> surrogate -> iterative halving -> optional k-medoids
reduction to an exact requested size.
"""

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .density import (
    DensityConfig,
    DensityProfile,
    Surrogate,
    build_surrogate,
    default_n_prime,
    density_profile,
    rank_by_density,
)
from .errors import ConfigError, KExceedsPoolError, TargetTooLargeError
from .geometry import METRICS, _pairwise_values, pairwise_distances
from .halving import KERNELS, HalvingTrace, halving_sizes, run_halving
from .kmedoids import farthest_first, pam

REPORT_SCHEMA = "teachset.report/1"


@dataclass(frozen=True)
class TeachingConfig:
    """Pipeline parameters.

    Exactly one of ``halvings`` and ``target_size`` must be set. The surrogate
    size is ``surrogate_size`` when given, otherwise ``ceil(surrogate_frac * n)``.
    ``kernel``/``bandwidth`` choose the halving kernel; ``seed`` is recorded
    for provenance (every step is deterministic).
    """

    surrogate_frac: float = 0.95
    radius: float = 0.4
    eta: float = 1.0e-4
    metric: str = "poincare"
    halvings: Optional[int] = None
    target_size: Optional[int] = None
    seed: int = 0
    surrogate_size: Optional[int] = None
    kernel: str = "distance"
    bandwidth: object = "median"

    def __post_init__(self):
        if (self.halvings is None) == (self.target_size is None):
            raise ConfigError("set exactly one of halvings and target_size")
        if self.halvings is not None and self.halvings < 0:
            raise ConfigError("halvings must be nonnegative")
        if self.target_size is not None and self.target_size < 1:
            raise ConfigError("target_size must be positive")
        if not 0.0 < self.surrogate_frac <= 1.0:
            raise ConfigError("surrogate_frac must lie in (0, 1]")
        if self.surrogate_size is not None and self.surrogate_size < 1:
            raise ConfigError("surrogate_size must be positive")
        if not self.radius > 0:
            raise ConfigError("radius must be positive")
        if not self.eta > 0:
            raise ConfigError("eta must be positive")
        if self.metric not in METRICS:
            raise ConfigError(f"unknown metric {self.metric!r}")
        if self.kernel not in KERNELS:
            raise ConfigError(f"unknown kernel {self.kernel!r}")
        if self.bandwidth != "median" and not float(self.bandwidth) > 0:
            raise ConfigError("bandwidth must be 'median' or a positive number")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")

    def n_prime(self, n):
        if self.surrogate_size is not None:
            if self.surrogate_size > n:
                raise ConfigError(f"surrogate_size {self.surrogate_size} exceeds n={n}")
            return int(self.surrogate_size)
        return default_n_prime(n, self.surrogate_frac)

    def density_config(self):
        return DensityConfig(self.radius, self.metric)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class TeachingSet:
    indices: np.ndarray
    trace: HalvingTrace
    adjusted_by_kmedoids: bool
    config: TeachingConfig
    profile: DensityProfile
    surrogate: Surrogate

    @property
    def cost(self):
        return len(self.indices)


def halvings_for_target(n_prime, target_size):
    """Largest ``l`` whose floor-halved stage size is still >= ``target_size``."""
    if target_size > n_prime:
        raise TargetTooLargeError(f"target_size {target_size} exceeds n'={n_prime}")
    l, size = 0, n_prime
    while size // 2 >= target_size:
        size //= 2
        l += 1
    return l


def kmedoids_reduce(ds, pool, k, metric="poincare", seed=0, scores=None,
                    radius=0.4):
    """Reduce ``pool`` to ``k`` medoids under ``metric``.

    Seeding is farthest-first from the densest pool point (``scores`` over
    the whole dataset, or a fresh density estimate on the pool). Returns the
    medoid dataset indices in ascending order. ``seed`` is accepted for
    provenance; the procedure has no random step.
    """
    pool = np.asarray(pool, dtype=np.int64)
    if not 1 <= k <= len(pool):
        raise KExceedsPoolError(f"k={k} exceeds pool of {len(pool)}")
    if k == len(pool):
        return np.sort(pool)
    dist = _pairwise_values(ds.points[pool], metric)
    np.fill_diagonal(dist, 0.0)
    if scores is None:
        sub = ds.subset(pool)
        local = density_profile(sub, DensityConfig(radius, metric)).unnormalized
    else:
        local = np.asarray(scores)[pool]
    start = int(rank_by_density(local)[0])
    result = pam(dist, k, farthest_first(dist, k, start))
    return np.sort(pool[result.medoids])


def prepare(ds, config, dm=None):
    """Distance matrix, density profile and surrogate for ``config``."""
    if dm is None:
        dm = pairwise_distances(ds, config.metric)
    profile = density_profile(ds, config.density_config(), dm)
    surrogate = build_surrogate(profile, config.n_prime(ds.n))
    kernel_dm = dm if config.metric == "poincare" else None
    return dm, profile, surrogate, kernel_dm


def teach(ds, config, dm=None):
    """Run the full pipeline and return the teaching set."""
    if ds.n < 2:
        raise ConfigError("teaching needs at least two points")
    dm, profile, surrogate, kernel_dm = prepare(ds, config, dm)
    if config.target_size is not None:
        l = halvings_for_target(surrogate.n_prime, config.target_size)
    else:
        l = config.halvings
    trace = run_halving(ds, surrogate, config.eta, l, config.kernel,
                        config.bandwidth, kernel_dm)
    indices = trace.final
    adjusted = False
    if config.target_size is not None and len(indices) > config.target_size:
        indices = kmedoids_reduce(ds, indices, config.target_size, config.metric,
                                  config.seed, profile.unnormalized, config.radius)
        adjusted = True
    return TeachingSet(np.asarray(indices, dtype=np.int64), trace, adjusted,
                       config, profile, surrogate)


def _round12(x):
    return float(f"{float(x):.12g}")


def teaching_report(ts, ds):
    """Plain-data summary of a teaching run (JSON-serializable)."""
    scores = ts.profile.scores
    stages = []
    for j, stage in enumerate(ts.trace.stages):
        s = scores[stage]
        stages.append({
            "stage": j,
            "size": len(stage),
            "min_density": _round12(s.min()),
            "mean_density": _round12(s.mean()),
        })
    final_scores = scores[ts.indices]
    return {
        "schema": REPORT_SCHEMA,
        "n": ds.n,
        "dim": ds.dim,
        "scale_factor": _round12(ds.scale_factor),
        "n_prime": ts.surrogate.n_prime,
        "surrogate_cutoff": _round12(ts.surrogate.cutoff_score),
        "halving_count": ts.trace.halving_count,
        "stage_sizes": ts.trace.sizes,
        "stages": stages,
        "bandwidths": [_round12(b) for b in ts.trace.bandwidths],
        "cost": ts.cost,
        "adjusted_by_kmedoids": ts.adjusted_by_kmedoids,
        "teaching_min_density": _round12(final_scores.min()),
        "teaching_mean_density": _round12(final_scores.mean()),
        "config": {k: (v if not isinstance(v, float) else _round12(v))
                   for k, v in ts.config.to_dict().items()},
    }
