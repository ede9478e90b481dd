"""Static SVG plots of experiment reports."""

from __future__ import annotations

import numpy as np

from .harness import ExperimentReport

# fixed so the SVG element ids do not change between runs
SVG_HASHSALT = "ordinal-embed"


def _size_value(size) -> float:
    return float(np.prod(size)) if isinstance(size, tuple) else float(size)


def plot_report(report: ExperimentReport, path) -> None:
    """Median recovery error against size on log-log axes, IQR as error bars."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = report.summary()
    x = np.array([_size_value(s) for s in report.spec.sizes])
    med = np.array([r["recovery_error"]["median"] for r in rows])
    lo = med - np.array([r["recovery_error"]["q25"] for r in rows])
    hi = np.array([r["recovery_error"]["q75"] for r in rows]) - med
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASHSALT, "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.errorbar(x, med, yerr=[lo, hi], marker="o", capsize=3)
        ax.set_xscale("log")
        if np.all(med > 0):
            ax.set_yscale("log")
        internal = isinstance(report.spec.sizes[0], tuple)
        ax.set_xlabel("m * n" if internal else "n")
        ax.set_ylabel("recovery error (median, IQR)")
        ax.set_title(f"{report.spec.variant}, p={report.spec.dim}")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
