"""Figures written next to the delimited reports of ``suite`` and ``simulate``."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_AGREEMENT_COLORS = {"exact": "tab:green", "maybe": "tab:orange", "conflict": "tab:red", "error": "tab:gray"}


def plot_suite_times(rows, path) -> None:
    """Horizontal bars of analysis time per program, colored by agreement."""
    names = [r["program"] for r in rows]
    times = [r["seconds"] for r in rows]
    colors = [_AGREEMENT_COLORS.get(r["agreement"], "tab:gray") for r in rows]
    fig, ax = plt.subplots(figsize=(7, 0.3 * len(rows) + 1.2))
    ax.barh(range(len(rows)), times, color=colors)
    ax.set_yticks(range(len(rows)), names, fontsize=8)
    ax.invert_yaxis()
    ax.set_xlabel("analysis time [s]")
    handles = [plt.Rectangle((0, 0), 1, 1, color=c) for c in _AGREEMENT_COLORS.values()]
    ax.legend(handles, list(_AGREEMENT_COLORS), fontsize=7, loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_step_histogram(report, path, title: str = "") -> None:
    """Log2-bucketed iteration counts of the terminated trials."""
    labels = [f"{lo}" if lo == hi else f"{lo}-{hi}" for lo, hi, _ in report.histogram]
    counts = [c for *_, c in report.histogram]
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.bar(range(len(counts)), counts, color="tab:blue")
    ax.set_xticks(range(len(counts)), labels, rotation=45, ha="right", fontsize=8)
    ax.set_xlabel("loop iterations until termination")
    ax.set_ylabel("trials")
    ax.set_title(title or f"terminated {report.terminated} of {report.runs}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
