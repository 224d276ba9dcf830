"""Static accuracy figures: bias, MSE and relative L1/L2 against subset count."""

from __future__ import annotations

from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

PANELS = [
    ("bias", "Estimated bias"),
    ("mse", "Estimated MSE"),
    ("rel_l1", "Relative L1 error"),
    ("rel_l2", "Relative L2 error"),
]


def accuracy_figure(rows, family: str, path) -> None:
    """Write a 2x2 SVG for one family; one line per sample size.

    ``rows`` are summary-table dicts (numbers may still be strings).
    """
    series = defaultdict(list)
    for r in rows:
        if r["family"] != family:
            continue
        series[int(r["N"])].append(r)
    with plt.rc_context({"svg.hashsalt": "parcopula", "svg.fonttype": "none"}):
        fig, axes = plt.subplots(2, 2, figsize=(9, 7))
        for ax, (key, title) in zip(axes.ravel(), PANELS):
            for N in sorted(series):
                pts = sorted(series[N], key=lambda r: int(r["M"]))
                ax.plot([int(p["M"]) for p in pts], [float(p[key]) for p in pts],
                        marker="o", label=f"N = {N:,}")
            ax.set_title(title)
            ax.set_xlabel("number of subsets M")
            ax.grid(True, alpha=0.3)
        axes[0, 0].legend()
        fig.suptitle(f"{family.capitalize()} copula")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
