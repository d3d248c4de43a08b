"""Figure rendering for experiment reports.

Two views: a per-setting bar chart summarizing a grid report, and a
scatter of calibrated estimates against true probabilities for a single
prediction set. Figures are rendered headlessly and written straight to
files next to the delimited output; nothing here opens a window.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

# Log-scale bars cannot show an exact zero; an exactly calibrated method
# is drawn at the axis floor instead.
_LOG_FLOOR = 1e-12

_SCATTER_CAP = 20_000


def _ordered_unique(items):
    seen = []
    for item in items:
        if item not in seen:
            seen.append(item)
    return seen


def save_results_figure(results, path: str, dpi: int = 150) -> bool:
    """Render a grid report as grouped RMSE bars, one panel per setting.

    A setting is a (b, pi0, n_cal, n_test) combination; within a panel,
    bars group by base model over the methods on the x axis, on a log
    scale. Failed cells are skipped. Returns False without writing when
    no cell succeeded.
    """
    ok = [r for r in results if r.metrics is not None]
    if not ok:
        return False

    def setting(r):
        c = r.cell
        return (c.b, c.pi0, c.n_calibration, c.n_test)

    def score(r):
        m = r.metrics
        return m.rmse if m.rmse is not None else m.brier

    settings = _ordered_unique(setting(r) for r in ok)
    methods = _ordered_unique(r.cell.method for r in ok)
    kinds = _ordered_unique(r.cell.base_model.kind for r in ok)
    lookup = {(setting(r), r.cell.base_model.kind, r.cell.method): score(r) for r in ok}

    fig, axes = plt.subplots(
        1,
        len(settings),
        figsize=(max(6.0, 4.5 * len(settings)), 4.4),
        squeeze=False,
        sharey=True,
    )
    width = 0.8 / len(kinds)
    x = np.arange(len(methods))
    for ax, s in zip(axes[0], settings):
        for j, kind in enumerate(kinds):
            offsets = x + (j - (len(kinds) - 1) / 2.0) * width
            values = [
                max(lookup.get((s, kind, m), np.nan), _LOG_FLOOR) for m in methods
            ]
            ax.bar(offsets, values, width, label=kind)
        b, pi0, n_cal, _ = s
        ax.set_title(f"b={b}, pi0={pi0}, n_cal={n_cal}")
        ax.set_xticks(x, methods, rotation=45, ha="right")
        ax.set_yscale("log")
        ax.grid(True, axis="y", alpha=0.3)
    axes[0][0].set_ylabel("RMSE vs true probability (test)")
    handles, labels = axes[0][0].get_legend_handles_labels()
    fig.legend(handles, labels, loc="upper right", title="base model")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return True


def save_calibration_figure(
    p_true, p_hat, path: str, label: str = "", dpi: int = 150
) -> bool:
    """Scatter calibrated estimates against true probabilities.

    Points on the diagonal are perfectly calibrated. Large inputs are
    thinned by striding to keep files small. Returns False without
    writing when true probabilities are unavailable.
    """
    if p_true is None:
        return False
    p_true = np.asarray(p_true, dtype=float)
    p_hat = np.asarray(p_hat, dtype=float)
    stride = max(1, len(p_true) // _SCATTER_CAP)
    fig, ax = plt.subplots(figsize=(5.2, 5.0))
    ax.scatter(p_true[::stride], p_hat[::stride], s=4, alpha=0.35, linewidths=0)
    lim = float(max(p_true.max(), p_hat.max()) * 1.05)
    ax.plot([0, lim], [0, lim], color="black", linewidth=1, linestyle="--")
    ax.set_xlim(0, lim)
    ax.set_ylim(0, lim)
    ax.set_xlabel("true probability")
    ax.set_ylabel("calibrated estimate")
    if label:
        ax.set_title(label)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return True
