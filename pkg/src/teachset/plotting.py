"""Matplotlib figures written next to the text reports.

Only the first two feature coordinates are drawn.
"""

import io

import numpy as np


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _save(fig, path):
    from .io import write_atomic
    buf = io.BytesIO()
    fmt = str(path).rsplit(".", 1)[-1].lower()
    meta = {"Software": None} if fmt == "png" else None
    fig.savefig(buf, format=fmt, dpi=120, metadata=meta)
    write_atomic(path, buf.getvalue())


def _xy(ds):
    pts = ds.points
    if pts.shape[1] == 1:
        return pts[:, 0], np.zeros(len(pts))
    return pts[:, 0], pts[:, 1]


def plot_teaching(ds, ts, path):
    """Dataset, surrogate (dropped points circled) and every halving stage."""
    plt = _pyplot()
    stages = ts.trace.stages
    panels = 2 + len(stages) - 1 + (1 if ts.adjusted_by_kmedoids else 0)
    cols = 3
    rows = -(-panels // cols)
    fig, axes = plt.subplots(rows, cols, figsize=(3.2 * cols, 3.0 * rows),
                             squeeze=False)
    x, y = _xy(ds)
    flat = axes.ravel()
    flat[0].scatter(x, y, s=4, c="tab:gray")
    flat[0].set_title(f"data (n={ds.n})", fontsize=9)
    dropped = ts.surrogate.dropped_indices
    kept = ts.surrogate.kept_indices
    flat[1].scatter(x[kept], y[kept], s=4, c="tab:blue")
    flat[1].scatter(x[dropped], y[dropped], s=18, facecolors="none",
                    edgecolors="tab:red", linewidths=0.6)
    flat[1].set_title(f"surrogate n'={len(kept)}, dropped {len(dropped)}", fontsize=9)
    extra = [(s, f"stage {j}: {len(s)}") for j, s in enumerate(stages) if j > 0]
    if ts.adjusted_by_kmedoids:
        extra.append((ts.indices, f"k-medoids: {ts.cost}"))
    for ax, (sel, title) in zip(flat[2:], extra):
        ax.scatter(x, y, s=3, c="lightgray")
        ax.scatter(x[sel], y[sel], s=22, marker="+", c="tab:red", linewidths=0.8)
        ax.set_title(title, fontsize=9)
    for ax in flat:
        ax.set_aspect("equal", adjustable="datalim")
        ax.tick_params(labelsize=7)
    for ax in flat[panels:]:
        ax.axis("off")
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)


def plot_density(ds, profile, path):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(4.5, 4.0))
    x, y = _xy(ds)
    sc = ax.scatter(x, y, s=5, c=profile.scores, cmap="viridis")
    fig.colorbar(sc, ax=ax, label="density score")
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_title(f"{profile.config.metric} density, r={profile.config.radius:g}",
                 fontsize=9)
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)


def plot_risk_curves(reports, path):
    """Risk disagreement against teaching cost, one line per report."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    for rep in reports:
        ax.plot(rep.costs, rep.risks, marker="o", ms=3, label=rep.strategy)
    ax.set_xscale("log", base=2)
    ax.set_xlabel("teaching cost")
    ax.set_ylabel("|R(subset) - R(full)|")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)
