"""Teaching-set selection with Poincare-density surrogates and iterative
kernel-deflation halving."""

__version__ = "0.1.0"

from .density import (
    DensityConfig,
    DensityProfile,
    Surrogate,
    build_surrogate,
    density_profile,
    density_score,
    hypersphere_members,
)
from .geometry import (
    BallDataset,
    DistanceMatrix,
    euclidean_distance,
    pairwise_distances,
    poincare_distance,
    project_to_ball,
)
from .halving import (
    HalvingTrace,
    KernelMatrix,
    SelectionState,
    build_kernel,
    deflation_gain,
    greedy_select,
    halve_once,
    run_halving,
)
from .teaching import TeachingConfig, TeachingSet, kmedoids_reduce, teach, teaching_report

__all__ = [
    "BallDataset", "DistanceMatrix", "DensityConfig", "DensityProfile", "Surrogate",
    "HalvingTrace", "KernelMatrix", "SelectionState", "TeachingConfig", "TeachingSet",
    "project_to_ball", "poincare_distance", "euclidean_distance", "pairwise_distances",
    "hypersphere_members", "density_score", "density_profile", "build_surrogate",
    "build_kernel", "deflation_gain", "greedy_select", "halve_once", "run_halving",
    "teach", "kmedoids_reduce", "teaching_report",
]
