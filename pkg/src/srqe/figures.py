"""File-rendered figures accompanying evaluation reports.

Everything draws through the Agg backend and saves straight to PNG; nothing
is ever displayed.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluation import CRITERIA, BTScores, EvalReport


def render_report_figures(
    reports: dict[str, EvalReport],
    bt: dict[str, BTScores],
    out_dir,
) -> list[str]:
    """Render the standard report figures; returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    written.append(_criteria_histograms(reports, os.path.join(out_dir, "criteria_hist.png")))
    written.append(_bt_bars(bt, os.path.join(out_dir, "bt_scores.png")))
    rank_path = _rank_accuracy(reports, os.path.join(out_dir, "rank_accuracy.png"))
    if rank_path:
        written.append(rank_path)
    return written


def _criteria_histograms(reports: dict[str, EvalReport], path: str) -> str:
    fig, axes = plt.subplots(len(reports), len(CRITERIA), figsize=(3.2 * len(CRITERIA), 2.6 * len(reports)), squeeze=False)
    for row, (name, report) in enumerate(sorted(reports.items())):
        for col, criterion in enumerate(CRITERIA):
            ax = axes[row][col]
            values = [
                entry[criterion]
                for entry in report.per_group.values()
                if entry.get(criterion) is not None
            ]
            if values:
                ax.hist(values, bins=min(20, max(5, len(values) // 3 + 1)), color="#4878d0")
                avg = report.averages.get(criterion)
                if avg is not None:
                    ax.axvline(avg, color="#d65f5f", linestyle="--", linewidth=1.2)
            ax.set_title(f"{name}: {criterion.upper()}", fontsize=9)
            ax.tick_params(labelsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _bt_bars(bt: dict[str, BTScores], path: str) -> str:
    methods: dict[str, list[float]] = {}
    for fitted in bt.values():
        for m, u in zip(fitted.methods, fitted.scores):
            methods.setdefault(m, []).append(float(u))
    names = sorted(methods)
    means = [np.mean(methods[m]) for m in names]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.7 * len(names) + 1.5), 3.2))
    ax.bar(range(len(names)), means, color="#4878d0")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("mean fitted score")
    ax.axhline(0.0, color="black", linewidth=0.6)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _rank_accuracy(reports: dict[str, EvalReport], path: str) -> str | None:
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    drew = False
    for name, report in sorted(reports.items()):
        if report.rank_accuracy:
            ns = np.arange(1, len(report.rank_accuracy) + 1)
            ax.plot(ns, report.rank_accuracy, marker="o", label=name)
            drew = True
    if not drew:
        plt.close(fig)
        return None
    ax.set_xlabel("top-n window")
    ax.set_ylabel("best-method hit rate")
    ax.set_ylim(0.0, 1.05)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
