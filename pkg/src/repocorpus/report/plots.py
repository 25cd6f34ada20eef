"""Matplotlib figures written next to the textual reports."""

from __future__ import annotations

import os
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from ..graph import StatsReport  # noqa: E402


def _save(fig, path: str | os.PathLike) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    # fixed metadata keeps repeated renders byte-stable
    fig.savefig(p, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return p


def plot_graph_stats(stats: StatsReport, path: str | os.PathLike, title: str = "") -> Path:
    """Entity counts as bars, the two dependency averages annotated."""
    labels = ["files", "classes", "functions", "globals", "file deps"]
    values = [stats.files, stats.classes, stats.functions, stats.globals, stats.file_dependencies]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    bars = ax.bar(labels, values, color="#4878a8")
    ax.bar_label(bars)
    ax.set_ylabel("count")
    ax.set_title(title or "Code graph")
    ax.text(
        0.98,
        0.95,
        f"avg FLD {stats.avg_file_level_deps:.2f}\navg fn deps {stats.avg_function_deps:.2f}\nLOC {stats.lines_of_code}",
        transform=ax.transAxes,
        ha="right",
        va="top",
        fontsize=8,
    )
    return _save(fig, path)


def plot_metrics(series: dict[str, list[tuple[int, float]]], path: str | os.PathLike) -> Path:
    """One line per metric over k."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for name, points in sorted(series.items()):
        ks = [k for k, _ in points]
        ax.plot(ks, [v for _, v in points], marker="o", label=name)
        ax.set_xticks(ks)
    ax.set_xlabel("k")
    ax.set_ylabel("rate")
    ax.set_ylim(0, 1.05)
    ax.legend()
    ax.grid(alpha=0.3)
    return _save(fig, path)


def plot_run_report(stages: dict[str, dict], path: str | os.PathLike) -> Path:
    """Stacked accepted/rejected/skipped bars per stage."""
    order = ["graph", "cpt", "relation", "composition", "utilization", "trace"]
    names = sorted(stages, key=lambda n: (order.index(n) if n in order else len(order), n))
    acc = [stages[n]["accepted"] for n in names]
    rej = [stages[n]["rejected"] for n in names]
    skp = [stages[n]["skipped"] for n in names]
    fig, ax = plt.subplots(figsize=(6.5, 3.5))
    ax.bar(names, acc, label="accepted", color="#4c9a5b")
    ax.bar(names, rej, bottom=acc, label="rejected", color="#c4524e")
    ax.bar(names, skp, bottom=[a + r for a, r in zip(acc, rej)], label="skipped", color="#b0b0b0")
    ax.set_ylabel("samples")
    ax.legend()
    return _save(fig, path)
