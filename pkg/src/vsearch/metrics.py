"""Interval-binned evaluation of verification results against ground truth.

Scored videos are grouped by their satisfaction probability into equal
intervals ``[0, 1/n), ..., [1 - 1/n, 1]`` (the last closed). Per interval:

* precision: fraction of the interval's videos that actually satisfy the
  formula (undefined when the interval is empty);
* recall: satisfied videos scoring in ``[lo, 1]`` over all satisfied
  videos, so it is cumulative from the interval's lower edge;
* search accuracy: credit true negatives below 0.5 and true positives at
  or above it; an interval straddling 0.5 is split there.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import InputFormatError, MissingAnnotationError
from .pipeline import SearchResult


@dataclass(frozen=True)
class GroundTruth:
    """``video_id -> formula_id -> actually satisfies``."""

    annotations: Mapping[str, Mapping[str, bool]]

    def get(self, video_id: str, formula_id: str) -> bool | None:
        row = self.annotations.get(video_id)
        if row is None or formula_id not in row:
            return None
        return bool(row[formula_id])

    @classmethod
    def from_file(cls, path: str | Path) -> "GroundTruth":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InputFormatError(f"{path}: not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise InputFormatError(f"{path}: expected an object of video annotations")
        return cls({str(v): {str(f): bool(b) for f, b in row.items()} for v, row in data.items()})


@dataclass(frozen=True)
class IntervalMetrics:
    lo: float
    hi: float
    n: int
    precision: float | None
    recall: float | None


@dataclass(frozen=True)
class IntervalAccuracy:
    lo: float
    hi: float
    n: int
    accuracy: float | None


@dataclass(frozen=True)
class MetricsRow:
    formula_id: str
    lo: float
    hi: float
    n: int
    precision: float | None
    recall: float | None
    accuracy: float | None


def _scored(results: Iterable[SearchResult], gt: GroundTruth, formula_id: str) -> list[tuple[str, float, bool]]:
    scored = []
    missing = []
    for r in results:
        if formula_id not in r.probabilities:
            raise InputFormatError(f"video {r.video_id!r} has no probability for {formula_id!r}")
        truth = gt.get(r.video_id, formula_id)
        if truth is None:
            missing.append(r.video_id)
        else:
            scored.append((r.video_id, r.probabilities[formula_id], truth))
    if missing:
        raise MissingAnnotationError(sorted(missing))
    return scored


def _interval_index(p: float, n_intervals: int) -> int:
    if not 0.0 <= p <= 1.0:
        raise InputFormatError(f"probability {p} outside [0, 1]")
    return min(int(p * n_intervals), n_intervals - 1)


def interval_metrics(
    results: Iterable[SearchResult],
    gt: GroundTruth,
    formula_id: str,
    n_intervals: int = 20,
) -> list[IntervalMetrics]:
    """Per-interval precision and cumulative recall for one formula."""
    if n_intervals < 1:
        raise InputFormatError(f"need at least one interval, got {n_intervals}")
    scored = _scored(results, gt, formula_id)

    counts = [0] * n_intervals
    true_pos = [0] * n_intervals
    for _, p, truth in scored:
        i = _interval_index(p, n_intervals)
        counts[i] += 1
        true_pos[i] += int(truth)

    all_positive = sum(1 for _, _, truth in scored if truth)
    out = []
    for i in range(n_intervals):
        lo, hi = i / n_intervals, (i + 1) / n_intervals
        tail = sum(1 for _, p, truth in scored if truth and p >= lo)
        out.append(IntervalMetrics(
            lo=lo,
            hi=hi,
            n=counts[i],
            precision=true_pos[i] / counts[i] if counts[i] else None,
            recall=tail / all_positive if all_positive else None,
        ))
    return out


def search_accuracy(
    results: Iterable[SearchResult],
    gt: GroundTruth,
    formula_id: str,
    n_intervals: int = 20,
) -> list[IntervalAccuracy]:
    """Per-interval search accuracy for one formula.

    Below 0.5 an interval is judged on how many of its videos do *not*
    satisfy the formula; at or above 0.5 on how many do. Intervals
    straddling 0.5 are split at 0.5.
    """
    if n_intervals < 1:
        raise InputFormatError(f"need at least one interval, got {n_intervals}")
    scored = _scored(results, gt, formula_id)

    pieces: list[tuple[float, float]] = []
    for i in range(n_intervals):
        lo, hi = i / n_intervals, (i + 1) / n_intervals
        if lo < 0.5 < hi:
            pieces.extend([(lo, 0.5), (0.5, hi)])
        else:
            pieces.append((lo, hi))

    out = []
    for lo, hi in pieces:
        last = hi == 1.0
        members = [(p, truth) for _, p, truth in scored if lo <= p < hi or (last and p == 1.0)]
        n = len(members)
        if n == 0:
            out.append(IntervalAccuracy(lo=lo, hi=hi, n=0, accuracy=None))
            continue
        tp = sum(1 for _, truth in members if truth)
        acc = tp / n if lo >= 0.5 else (n - tp) / n
        out.append(IntervalAccuracy(lo=lo, hi=hi, n=n, accuracy=acc))
    return out


def metrics_table(
    results: Sequence[SearchResult],
    gt: GroundTruth,
    formula_ids: Iterable[str],
    n_intervals: int = 20,
) -> list[MetricsRow]:
    """Join precision/recall and accuracy into one row set per formula."""
    rows = []
    for fid in formula_ids:
        base = interval_metrics(results, gt, fid, n_intervals)
        accs = {(a.lo, a.hi): a for a in search_accuracy(results, gt, fid, n_intervals)}
        matched = set()
        for m in base:
            acc = accs.get((m.lo, m.hi))
            if acc is not None:
                matched.add((m.lo, m.hi))
            rows.append(MetricsRow(
                formula_id=fid, lo=m.lo, hi=m.hi, n=m.n,
                precision=m.precision, recall=m.recall,
                accuracy=acc.accuracy if acc is not None else None,
            ))
        # Split intervals (odd interval counts) have no precision/recall row.
        for key, acc in accs.items():
            if key not in matched:
                rows.append(MetricsRow(
                    formula_id=fid, lo=acc.lo, hi=acc.hi, n=acc.n,
                    precision=None, recall=None, accuracy=acc.accuracy,
                ))
    rows.sort(key=lambda r: (r.formula_id, r.lo, r.hi))
    return rows


REPORT_COLUMNS = ["formula_id", "lo", "hi", "n", "precision", "recall", "accuracy"]


def emit_report(rows: Iterable[MetricsRow], path: str | Path) -> None:
    """Write rows as CSV; undefined values become empty cells."""

    def cell(value: float | None) -> str:
        return "" if value is None else repr(value)

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_COLUMNS)
        for r in rows:
            writer.writerow([
                r.formula_id, repr(r.lo), repr(r.hi), r.n,
                cell(r.precision), cell(r.recall), cell(r.accuracy),
            ])
