"""Chart rendering for score reports.

Figures are always written to files; no display server is assumed.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .clause import SubordinationClass
from .evalkit import PatternChoice, PatternTally, Report

# entry ids and variant names are ASCII, so the default fonts suffice


def save_score_figure(report: Report, path: str | Path) -> Path:
    """Grouped per-entry bars for both variants, plus the overall means."""
    path = Path(path)
    labels = [e.entry_id for e in report.per_entry] + ["mean"]
    before = [float(e.before) for e in report.per_entry] + [
        float(report.means[report.before_variant])
    ]
    after = [float(e.after) for e in report.per_entry] + [
        float(report.means[report.after_variant])
    ]
    positions = range(len(labels))
    width = 0.38

    fig, ax = plt.subplots(figsize=(max(6.0, 1.2 * len(labels)), 4.0))
    try:
        ax.bar(
            [p - width / 2 for p in positions],
            before,
            width,
            label=report.before_variant,
            color="#888888",
        )
        ax.bar(
            [p + width / 2 for p in positions],
            after,
            width,
            label=report.after_variant,
            color="#3465a4",
        )
        ax.set_xticks(list(positions))
        ax.set_xticklabels(labels, rotation=30, ha="right")
        ax.set_ylim(0, 5.2)
        ax.set_ylabel("score (1-5)")
        ax.legend()
        fig.tight_layout()
        fig.savefig(path)
    finally:
        plt.close(fig)
    return path


_PATTERN_LABELS = {
    PatternChoice.PATTERN_I: "Pattern I (clause first)",
    PatternChoice.PATTERN_II: "Pattern II (main first)",
    PatternChoice.OTHER: "Others",
}
_CLASS_LABELS = {
    SubordinationClass.CLAUSE_STRONGER: "clause > main",
    SubordinationClass.EQUAL: "clause = main",
}


def save_pattern_figure(tally: PatternTally, path: str | Path) -> Path:
    """Pattern counts grouped by subordination class."""
    path = Path(path)
    patterns = list(PatternChoice)
    classes = list(SubordinationClass)
    positions = range(len(patterns))
    width = 0.38

    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    try:
        for offset, (sub, color) in enumerate(zip(classes, ("#888888", "#3465a4"))):
            counts = [tally.counts[(sub, p)] for p in patterns]
            ax.bar(
                [p + (offset - 0.5) * width for p in positions],
                counts,
                width,
                label=_CLASS_LABELS[sub],
                color=color,
            )
        ax.set_xticks(list(positions))
        ax.set_xticklabels([_PATTERN_LABELS[p] for p in patterns])
        ax.set_ylabel("sentences")
        ax.legend()
        fig.tight_layout()
        fig.savefig(path)
    finally:
        plt.close(fig)
    return path
