"""Figures for CLI reports, rendered off-screen to image files."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.ticker import MaxNLocator  # noqa: E402
import numpy as np  # noqa: E402

from .fibres import INF, LEVELS, RELATION  # noqa: E402


def _matrix(fe):
    n = fe.size
    if fe.lattice is LEVELS:
        finite = [v for v in fe.values if v != INF]
        cap = (max(finite) + 1) if finite else 1
        vals = [cap if v == INF else v for v in fe.values]
    else:
        cap = 1
        vals = [1 if v else 0 for v in fe.values]
    shape = (n, n) if fe.kind == RELATION else (1, n)
    return np.array(vals, dtype=float).reshape(shape), cap


def _heatmap(ax, fe, names, title):
    mat, cap = _matrix(fe)
    ax.imshow(mat, cmap="viridis", vmin=0, vmax=max(cap, 1), aspect="equal")
    ax.set_title(title, fontsize=10)
    ax.set_xticks(range(len(names)), labels=names, rotation=90, fontsize=8)
    if fe.kind == RELATION:
        ax.set_yticks(range(len(names)), labels=names, fontsize=8)
    else:
        ax.set_yticks([])
    for (r, c), v in np.ndenumerate(mat):
        if fe.lattice is LEVELS:
            text = "inf" if v == cap else str(int(v))
        else:
            text = str(int(v))
        ax.text(c, r, text, ha="center", va="center", fontsize=7, color="w" if v < cap / 2 else "k")


def _trace_counts(trace):
    out = []
    for fe in trace:
        if fe.lattice is LEVELS:
            out.append(sum(1 for v in fe.values if v == INF))
        else:
            out.append(sum(1 for v in fe.values if v))
    return out


def save_fibres(path, panels, names, trace=None):
    """One heatmap per (title, fibre element); optionally a panel for the approximant chain."""
    cols = len(panels) + (1 if trace else 0)
    fig, axes = plt.subplots(1, cols, figsize=(3.6 * cols, 3.6), squeeze=False)
    for ax, (title, fe) in zip(axes[0], panels):
        _heatmap(ax, fe, names, title)
    if trace:
        ax = axes[0][-1]
        counts = _trace_counts(trace)
        ax.plot(range(len(counts)), counts, marker="o")
        ax.xaxis.set_major_locator(MaxNLocator(integer=True))
        ax.set_xlabel("approximant")
        ax.set_ylabel("entries at top")
        ax.set_title("descending chain", fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)
    return path
