"""Synthetic data used by the demos and the acceptance checks."""

import numpy as np

CASE_STUDY_CENTERS = np.array([[-3.0, 0.0], [3.0, 0.0], [0.0, 4.0]])


def gaussian_mixture(n, centers, std=1.0, seed=0):
    """Isotropic Gaussian clusters with sizes as equal as possible.

    Returns raw rows ``(n, d)`` and integer labels, rows grouped by cluster.
    """
    centers = np.asarray(centers, dtype=float)
    rng = np.random.default_rng(seed)
    k = len(centers)
    sizes = [n // k + (1 if i < n % k else 0) for i in range(k)]
    rows = np.vstack([rng.normal(c, std, size=(s, centers.shape[1]))
                      for c, s in zip(centers, sizes)])
    labels = np.repeat(np.arange(k), sizes)
    return rows, labels


def case_study_gaussian(seed=0, n=1400):
    """Three overlapping 2-D Gaussian clusters, 1400 points by default."""
    return gaussian_mixture(n, CASE_STUDY_CENTERS, 1.0, seed)


def blobs_with_noise(n=900, noise_frac=0.05, seed=0, std=1.0):
    """Three 2-D blobs plus uniform noise over the padded bounding box.

    Noise points carry their own label (3) since they belong to no cluster.
    """
    rng = np.random.default_rng(seed)
    n_noise = int(round(noise_frac * n))
    rows, labels = gaussian_mixture(n - n_noise, CASE_STUDY_CENTERS, std,
                                    int(rng.integers(2**31)))
    lo = rows.min(axis=0) - 1.0
    hi = rows.max(axis=0) + 1.0
    noise = rng.uniform(lo, hi, size=(n_noise, rows.shape[1]))
    return (np.vstack([rows, noise]),
            np.concatenate([labels, np.full(n_noise, len(CASE_STUDY_CENTERS))]))
