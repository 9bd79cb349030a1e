"""Five-level quality rubric, annotation capture, and score reports.

All statistics use exact rational arithmetic; rounding happens only when
formatting for display (one decimal place for means and percentages).
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Sequence, TextIO

from enum import Enum

from .clause import SubordinationClass

BEFORE_PROMPT = "before-prompt"
AFTER_PROMPT = "after-prompt"


class ScoreOutOfRange(ValueError):
    """Scores live on the closed 1..5 scale."""


class EmptyVariant(ValueError):
    """A variant being compared has no annotations."""


class PatternChoice(str, Enum):
    """Target-side ordering of clause content vs. main-clause content."""

    PATTERN_I = "pattern-i"
    PATTERN_II = "pattern-ii"
    OTHER = "other"


@dataclass(frozen=True)
class Rubric:
    """Score -> description, exactly five levels."""

    levels: dict[int, str]

    def __post_init__(self):
        if sorted(self.levels) != [1, 2, 3, 4, 5]:
            raise ValueError("rubric must define exactly levels 1..5")
        if not all(text.strip() for text in self.levels.values()):
            raise ValueError("rubric descriptions must be non-empty")

    def format(self) -> str:
        return "\n".join(
            f"  {score}. {self.levels[score]}" for score in (5, 4, 3, 2, 1)
        )


def load_default_rubric() -> Rubric:
    source = resources.files("rentai").joinpath("data/rubric.json")
    obj = json.loads(source.read_text(encoding="utf-8"))
    return Rubric({int(k): v for k, v in obj["levels"].items()})


@dataclass(frozen=True)
class Annotation:
    """One human judgment of one translation variant of one entry."""

    entry_id: str
    variant: str  # before-prompt / after-prompt, extensible to strategy names
    score: int
    annotator_id: str
    timestamp: str

    def __post_init__(self):
        if not isinstance(self.score, int) or not 1 <= self.score <= 5:
            raise ScoreOutOfRange(f"score {self.score!r} outside 1..5")
        if not self.variant:
            raise EmptyVariant("annotation variant must be non-empty")

    def to_json(self) -> dict:
        return {
            "entry_id": self.entry_id,
            "variant": self.variant,
            "score": self.score,
            "annotator_id": self.annotator_id,
            "timestamp": self.timestamp,
        }


def load_annotations(path: str | Path | None = None) -> list[Annotation]:
    """Read an annotation log (bundled Table-5 fixture by default)."""
    if path is None:
        text = resources.files("rentai").joinpath("data/annotations.jsonl").read_text(
            encoding="utf-8"
        )
    else:
        text = Path(path).read_text(encoding="utf-8")
    annotations = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            annotations.append(
                Annotation(
                    entry_id=obj["entry_id"],
                    variant=obj["variant"],
                    score=obj["score"],
                    annotator_id=obj.get("annotator_id", ""),
                    timestamp=obj.get("timestamp", ""),
                )
            )
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ValueError(f"annotation log line {number}: {exc}") from exc
    return annotations


def append_annotation(path: str | Path, annotation: Annotation) -> None:
    """Append one record and flush; interrupted sessions keep prior lines."""
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(annotation.to_json(), ensure_ascii=False) + "\n")
        fh.flush()


@dataclass(frozen=True)
class EntryDelta:
    entry_id: str
    before: Fraction
    after: Fraction

    @property
    def delta(self) -> Fraction:
        return self.after - self.before


@dataclass(frozen=True)
class PatternTally:
    """Counts and column percentages of pattern labels."""

    counts: dict[tuple[SubordinationClass, PatternChoice], int]
    column_totals: dict[SubordinationClass, int]

    def percentage(
        self, subordination: SubordinationClass, pattern: PatternChoice
    ) -> Fraction | None:
        total = self.column_totals.get(subordination, 0)
        if total == 0:
            return None
        return Fraction(self.counts[(subordination, pattern)] * 100, total)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def to_json(self) -> dict:
        cells = []
        for sub in SubordinationClass:
            for pattern in PatternChoice:
                pct = self.percentage(sub, pattern)
                cells.append(
                    {
                        "subordination": sub.value,
                        "pattern": pattern.value,
                        "count": self.counts[(sub, pattern)],
                        "percent": None if pct is None else [pct.numerator, pct.denominator],
                    }
                )
        return {
            "cells": cells,
            "column_totals": {s.value: t for s, t in self.column_totals.items()},
        }


def tally_patterns(
    labels: Sequence[tuple[SubordinationClass, PatternChoice]],
) -> PatternTally:
    """Count labels per (subordination, pattern) cell."""
    if not labels:
        raise ValueError("no pattern labels to tally")
    counts = {
        (sub, pattern): 0 for sub in SubordinationClass for pattern in PatternChoice
    }
    for sub, pattern in labels:
        counts[(SubordinationClass(sub), PatternChoice(pattern))] += 1
    totals = {
        sub: sum(counts[(sub, pattern)] for pattern in PatternChoice)
        for sub in SubordinationClass
    }
    return PatternTally(counts=counts, column_totals=totals)


def load_pattern_labels(
    path: str | Path | None = None,
) -> list[tuple[SubordinationClass, PatternChoice]]:
    """Read pattern labels from JSON Lines (bundled tally set by default)."""
    if path is None:
        text = resources.files("rentai").joinpath(
            "data/pattern_labels.jsonl"
        ).read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    labels = []
    for line in text.splitlines():
        if line.strip():
            obj = json.loads(line)
            labels.append(
                (
                    SubordinationClass(obj["subordination"]),
                    PatternChoice(obj["pattern"]),
                )
            )
    return labels


@dataclass(frozen=True)
class Report:
    """Aggregate over an annotation log, exact until displayed."""

    means: dict[str, Fraction]
    counts: dict[str, int]
    before_variant: str
    after_variant: str
    improvement_percent: Fraction | None
    per_entry: tuple[EntryDelta, ...]
    pattern_tally: PatternTally | None = None

    def to_json(self) -> dict:
        def rat(x: Fraction | None):
            return None if x is None else [x.numerator, x.denominator]

        return {
            "means": {v: rat(m) for v, m in self.means.items()},
            "counts": dict(self.counts),
            "before_variant": self.before_variant,
            "after_variant": self.after_variant,
            "improvement_percent": rat(self.improvement_percent),
            "per_entry": [
                {
                    "entry_id": e.entry_id,
                    "before": rat(e.before),
                    "after": rat(e.after),
                    "delta": rat(e.delta),
                }
                for e in self.per_entry
            ],
            "pattern_tally": None
            if self.pattern_tally is None
            else self.pattern_tally.to_json(),
        }


def aggregate(
    annotations: Iterable[Annotation],
    *,
    before: str = BEFORE_PROMPT,
    after: str = AFTER_PROMPT,
    pattern_labels: Sequence[tuple[SubordinationClass, PatternChoice]] | None = None,
) -> Report:
    """Exact per-variant means and the before/after improvement."""
    by_variant: dict[str, list[int]] = {}
    by_entry: dict[tuple[str, str], list[int]] = {}
    entry_order: list[str] = []
    for annotation in annotations:
        by_variant.setdefault(annotation.variant, []).append(annotation.score)
        by_entry.setdefault((annotation.entry_id, annotation.variant), []).append(
            annotation.score
        )
        if annotation.entry_id not in entry_order:
            entry_order.append(annotation.entry_id)

    for variant in (before, after):
        if not by_variant.get(variant):
            raise EmptyVariant(f"no annotations for variant {variant!r}")

    means = {
        variant: Fraction(sum(scores), len(scores))
        for variant, scores in by_variant.items()
    }
    improvement = None
    if means[before] > 0:
        improvement = (means[after] - means[before]) / means[before] * 100

    per_entry = tuple(
        EntryDelta(
            entry_id=entry_id,
            before=Fraction(sum(b), len(b)),
            after=Fraction(sum(a), len(a)),
        )
        for entry_id in entry_order
        if (b := by_entry.get((entry_id, before)))
        and (a := by_entry.get((entry_id, after)))
    )
    tally = tally_patterns(pattern_labels) if pattern_labels else None
    return Report(
        means=means,
        counts={v: len(s) for v, s in by_variant.items()},
        before_variant=before,
        after_variant=after,
        improvement_percent=improvement,
        per_entry=per_entry,
        pattern_tally=tally,
    )


def format_decimal(value: Fraction) -> str:
    """One decimal place, as in the published tables."""
    return f"{float(value):.1f}"


def format_percent(value: Fraction) -> str:
    """Integral percentages print bare; otherwise one decimal place."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{float(value):.1f}"


def format_report(report: Report) -> str:
    lines = ["variant          mean  n"]
    before = report.means[report.before_variant]
    after = report.means[report.after_variant]
    lines.append(
        f"{report.before_variant:<16} {format_decimal(before):>4}  "
        f"{report.counts[report.before_variant]}"
    )
    after_cell = format_decimal(after)
    if report.improvement_percent is not None:
        after_cell += f" ({format_percent(report.improvement_percent)}%)"
    lines.append(
        f"{report.after_variant:<16} {after_cell}  "
        f"{report.counts[report.after_variant]}"
    )
    if report.per_entry:
        lines.append("")
        lines.append("entry      before  after  delta")
        for entry in report.per_entry:
            delta = entry.delta
            sign = "+" if delta >= 0 else ""
            lines.append(
                f"{entry.entry_id:<10} {format_decimal(entry.before):>6}  "
                f"{format_decimal(entry.after):>5}  {sign}{format_decimal(delta)}"
            )
    if report.pattern_tally is not None:
        lines.append("")
        lines.append(format_pattern_table(report.pattern_tally))
    return "\n".join(lines)


_PATTERN_NAMES = {
    PatternChoice.PATTERN_I: "Pattern I",
    PatternChoice.PATTERN_II: "Pattern II",
    PatternChoice.OTHER: "Others",
}
_CLASS_NAMES = {
    SubordinationClass.CLAUSE_STRONGER: "clause > main",
    SubordinationClass.EQUAL: "clause = main",
}


def format_pattern_table(tally: PatternTally) -> str:
    lines = [f"{'':<12}" + "".join(f"{_CLASS_NAMES[s]:>16}" for s in SubordinationClass)]
    for pattern in PatternChoice:
        cells = []
        for sub in SubordinationClass:
            count = tally.counts[(sub, pattern)]
            pct = tally.percentage(sub, pattern)
            cell = str(count) if pct is None else f"{count} ({format_percent(pct)}%)"
            cells.append(f"{cell:>16}")
        lines.append(f"{_PATTERN_NAMES[pattern]:<12}" + "".join(cells))
    lines.append(
        f"{'total':<12}"
        + "".join(f"{tally.column_totals[s]:>16}" for s in SubordinationClass)
    )
    return "\n".join(lines)


@dataclass(frozen=True)
class AnnotationItem:
    """One (entry, variant) pair put in front of the annotator."""

    entry_id: str
    variant: str
    source_text: str
    translation: str


def annotate_session(
    items: Sequence[AnnotationItem],
    rubric: Rubric,
    annotator_id: str,
    log_path: str | Path,
    *,
    answers: Iterator[str] | None = None,
    out: TextIO | None = None,
) -> list[Annotation]:
    """Collect one score per item; every answer is logged immediately.

    ``answers`` supplies scripted input (tests, piped stdin); interactive
    sessions read the terminal.  Interrupts and exhausted answer streams
    keep whatever was already logged.
    """
    if out is None:
        out = sys.stdout

    def read(prompt: str) -> str:
        if answers is not None:
            return next(answers)
        return input(prompt)

    recorded: list[Annotation] = []
    for item in items:
        print(f"\n[{item.entry_id} / {item.variant}]", file=out)
        print(f"source:      {item.source_text}", file=out)
        print(f"translation: {item.translation}", file=out)
        print(rubric.format(), file=out)
        while True:
            try:
                answer = read("score [1-5]: ").strip()
            except (StopIteration, EOFError, KeyboardInterrupt):
                return recorded
            if answer in {"1", "2", "3", "4", "5"}:
                break
            print("please enter a score from 1 to 5", file=out)
        annotation = Annotation(
            entry_id=item.entry_id,
            variant=item.variant,
            score=int(answer),
            annotator_id=annotator_id,
            timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        )
        append_annotation(log_path, annotation)
        recorded.append(annotation)
    return recorded
