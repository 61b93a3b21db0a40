"""End-to-end video search: verify detection traces against a spec set and
apply the inclusion threshold.

A video enters the search result when its satisfaction probability exceeds
the threshold for every formula (strict comparison; a tie at exactly the
threshold is excluded and logged).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

from .automaton import DetectionTrace, frames_to_automaton
from .calibration import CalibrationModel
from .checker import check_probability
from .errors import InputFormatError, PropositionMismatchError, VsearchError
from .nl2spec import SpecSet

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class SearchResult:
    video_id: str
    probabilities: Mapping[str, float]
    included: bool
    threshold: float


def verify_video(
    trace: DetectionTrace,
    spec: SpecSet,
    model: CalibrationModel,
    threshold: float = DEFAULT_THRESHOLD,
) -> SearchResult:
    """Build the trace's automaton once and check every formula against it."""
    if not spec.formulas:
        raise InputFormatError("spec set has no formulas")
    prop_names = [p.name for p in spec.propositions]
    try:
        aut = frames_to_automaton(trace, model, props=prop_names)
        probs = {
            fid: check_probability(aut, formula, formula_id=fid).probability
            for fid, formula, _ in spec.formulas
        }
    except VsearchError as exc:
        exc.args = (f"video {trace.video_id!r}: {exc}",)
        raise

    lowest = min(probs.values())
    if lowest == threshold:
        logger.info(
            "video %r sits exactly at threshold %s and is excluded",
            trace.video_id, threshold,
        )
    return SearchResult(
        video_id=trace.video_id,
        probabilities=probs,
        included=lowest > threshold,
        threshold=threshold,
    )


def chunk_trace(trace: DetectionTrace, chunk_len: int) -> list[DetectionTrace]:
    """Split a trace into consecutive disjoint chunks of ``chunk_len``
    frames (the last may be shorter). Chunk ids are ``video_id#k``."""
    if chunk_len < 1:
        raise InputFormatError(f"chunk length must be >= 1, got {chunk_len}")
    chunks = []
    for k, start in enumerate(range(0, len(trace.frames), chunk_len)):
        chunks.append(DetectionTrace(
            video_id=f"{trace.video_id}#{k}",
            frame_rate=trace.frame_rate,
            propositions=trace.propositions,
            frames=trace.frames[start:start + chunk_len],
        ))
    return chunks


def search(
    traces: Iterable[DetectionTrace],
    spec: SpecSet,
    model: CalibrationModel,
    threshold: float = DEFAULT_THRESHOLD,
    chunk_len: int | None = None,
    on_error: Callable[[str, Exception], None] | None = None,
) -> list[SearchResult]:
    """Verify every trace and return results sorted by video id.

    A failure for one video is reported (``on_error`` or the module logger)
    and does not abort the rest of the search. With ``chunk_len`` set, each
    trace is split into chunks that are verified independently.
    """
    if not 0.0 <= threshold <= 1.0:
        raise InputFormatError(f"threshold {threshold} outside [0, 1]")
    units: list[DetectionTrace] = []
    for trace in traces:
        units.extend(chunk_trace(trace, chunk_len) if chunk_len else [trace])

    results = []
    for unit in units:
        try:
            results.append(verify_video(unit, spec, model, threshold))
        except VsearchError as exc:
            if on_error is not None:
                on_error(unit.video_id, exc)
            else:
                logger.warning("skipping video %r: %s", unit.video_id, exc)
    results.sort(key=lambda r: r.video_id)
    return results
