"""Metric-vs-level comparison curves, one panel per (explainer, metric)."""

from pathlib import Path

import matplotlib.pyplot as plt

from .io import SchemaError, read_rows

REQUIRED = ("explainer", "source", "level", "metric", "mean", "stderr", "n")

SOURCE_STYLE = {
    "input": {"color": "#d62728", "marker": "o"},
    "output": {"color": "#1f77b4", "marker": "s"},
}

METRIC_LABEL = {
    "kendall_tau": "Kendall tau",
    "topk_overlap": "top-K overlap",
}


def _deterministic_style():
    plt.rcParams["svg.hashsalt"] = "figplot"


def plot_comparison(summary_csv, out_path, title=None):
    """Render input-vs-output discrepancy curves from a summary.csv.

    One panel per (explainer, metric) pair; each panel carries one error
    bar series per perturbation source over the level axis. Every plotted
    number comes verbatim from the CSV.
    """
    rows = read_rows(summary_csv, REQUIRED)
    explainers = sorted({r["explainer"] for r in rows})
    metrics = sorted({r["metric"] for r in rows})
    sources = sorted({r["source"] for r in rows})
    if not explainers or not metrics:
        raise SchemaError(f"{summary_csv}: nothing to plot")

    _deterministic_style()
    fig, axes = plt.subplots(
        len(metrics),
        len(explainers),
        figsize=(4.2 * len(explainers), 3.4 * len(metrics)),
        squeeze=False,
    )
    for mi, metric in enumerate(metrics):
        for ei, explainer in enumerate(explainers):
            ax = axes[mi][ei]
            ax.set_gid(f"panel-{explainer}-{metric}")
            for source in sources:
                series = sorted(
                    (
                        (int(r["level"]), float(r["mean"]), float(r["stderr"]))
                        for r in rows
                        if r["explainer"] == explainer
                        and r["metric"] == metric
                        and r["source"] == source
                    ),
                    key=lambda item: item[0],
                )
                if not series:
                    continue
                levels = [s[0] for s in series]
                means = [s[1] for s in series]
                errs = [s[2] for s in series]
                style = SOURCE_STYLE.get(source, {})
                container = ax.errorbar(
                    levels, means, yerr=errs, capsize=3, label=source, **style
                )
                container.lines[0].set_gid(f"series-{explainer}-{metric}-{source}")
            ax.set_xlabel("perturbation level")
            ax.set_ylabel(METRIC_LABEL.get(metric, metric))
            ax.set_title(explainer)
            ax.set_xticks(sorted({int(r["level"]) for r in rows}))
            ax.legend()
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, metadata={"Date": None} if out_path.suffix == ".svg" else None)
    plt.close(fig)
    return out_path
