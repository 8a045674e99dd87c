"""Condition-number distribution per sentence length."""

from pathlib import Path

import matplotlib.pyplot as plt

from .io import read_rows

REQUIRED = ("length", "iteration", "kappa")

WELL_CONDITIONED_BOUND = 30.0


def plot_kappa(kappa_csv, out_path, title=None):
    """Box plot of kappa per length with the conditioning bound marked."""
    rows = read_rows(kappa_csv, REQUIRED)
    by_length = {}
    for row in rows:
        by_length.setdefault(int(row["length"]), []).append(float(row["kappa"]))
    lengths = sorted(by_length)

    plt.rcParams["svg.hashsalt"] = "figplot"
    fig, ax = plt.subplots(figsize=(1.8 + 1.4 * len(lengths), 4.0))
    ax.set_gid("panel-kappa")
    ax.boxplot([by_length[l] for l in lengths], tick_labels=[str(l) for l in lengths])
    threshold = ax.axhline(WELL_CONDITIONED_BOUND, color="#d62728", linestyle="--")
    threshold.set_gid("kappa-threshold")
    ax.set_xlabel("sentence length")
    ax.set_ylabel("condition number")
    ax.set_ylim(bottom=0)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, metadata={"Date": None} if out_path.suffix == ".svg" else None)
    plt.close(fig)
    return out_path
