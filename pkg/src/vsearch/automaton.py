"""Layered probabilistic automata built from per-frame detection traces.

Each video frame becomes one layer. Every layer holds one state per
conjunction over the propositions whose probability is nonzero; the
probability of a state is the product over propositions of the calibrated
probability (positive conjunct) or its complement (negative conjunct).
Every edge into a state carries that state's probability, which makes each
non-final state's outgoing distribution sum to 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .calibration import CalibrationModel, map_thresholded
from .errors import (
    EmptyTraceError,
    MalformedAutomatonError,
    MalformedTraceError,
    PropositionMismatchError,
)

STOCHASTIC_TOL = 1e-9


@dataclass(frozen=True)
class Frame:
    """Detector output for one sampled frame.

    Each proposition is scored either softly (a confidence in [0, 1]) or
    hard (a boolean dataset label), never both.
    """

    index: int
    timestamp_s: float
    confidences: Mapping[str, float] = field(default_factory=dict)
    hard_labels: Mapping[str, bool] = field(default_factory=dict)

    def __post_init__(self):
        if self.index < 0:
            raise MalformedTraceError(f"frame index {self.index} is negative")
        overlap = set(self.confidences) & set(self.hard_labels)
        if overlap:
            raise MalformedTraceError(
                f"frame {self.index}: propositions scored both soft and hard: {sorted(overlap)}"
            )
        for prop, c in self.confidences.items():
            if not 0.0 <= c <= 1.0:
                raise MalformedTraceError(
                    f"frame {self.index}: confidence for {prop!r} is {c}, outside [0, 1]"
                )


@dataclass(frozen=True)
class DetectionTrace:
    """Per-video sequence of frames with per-proposition scores."""

    video_id: str
    frame_rate: float
    propositions: tuple[str, ...]
    frames: tuple[Frame, ...]

    def __post_init__(self):
        if not self.frames:
            raise EmptyTraceError(f"trace {self.video_id!r} has no frames")
        if self.frame_rate <= 0:
            raise MalformedTraceError(f"trace {self.video_id!r}: frame rate must be positive")
        if len(set(self.propositions)) != len(self.propositions):
            raise MalformedTraceError(f"trace {self.video_id!r}: duplicate propositions")
        last = -1
        for f in self.frames:
            if f.index <= last:
                raise MalformedTraceError(
                    f"trace {self.video_id!r}: frame indices must be strictly increasing"
                )
            last = f.index
            covered = set(f.confidences) | set(f.hard_labels)
            missing = set(self.propositions) - covered
            extra = covered - set(self.propositions)
            if missing:
                raise MalformedTraceError(
                    f"trace {self.video_id!r}, frame {f.index}: no score for {sorted(missing)}"
                )
            if extra:
                raise MalformedTraceError(
                    f"trace {self.video_id!r}, frame {f.index}: undeclared propositions {sorted(extra)}"
                )


@dataclass(frozen=True)
class State:
    """One automaton state: ``label`` maps every proposition to its truth
    value in this state's conjunction; the initial state's label is None."""

    id: int
    layer: int
    label: Mapping[str, bool] | None


@dataclass(frozen=True)
class Transition:
    src: int
    dst: int
    probability: float


@dataclass(frozen=True)
class ProbabilisticAutomaton:
    video_id: str
    states: tuple[State, ...]
    initial: int
    accepting: frozenset[int]
    transitions: tuple[Transition, ...]

    def state_by_id(self, sid: int) -> State:
        return self._index[sid]

    @property
    def _index(self) -> dict[int, State]:
        return {s.id: s for s in self.states}

    @property
    def n_layers(self) -> int:
        return max(s.layer for s in self.states)

    def layer_states(self, layer: int) -> list[State]:
        return [s for s in self.states if s.layer == layer]

    def propositions(self) -> tuple[str, ...]:
        for s in self.states:
            if s.label is not None:
                return tuple(sorted(s.label))
        return ()


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    message: str

    def __str__(self) -> str:
        return f"[{self.kind}] {self.message}"


def frames_to_automaton(
    trace: DetectionTrace,
    model: CalibrationModel,
    props: Iterable[str] | None = None,
) -> ProbabilisticAutomaton:
    """Build the layered automaton for ``trace`` using the thresholded
    calibration mapping.

    ``props`` restricts construction to a subset of the trace's
    propositions (default: all of them, in trace order). Hard-labelled
    propositions contribute probability exactly 0 or 1.
    """
    if props is None:
        chosen = list(trace.propositions)
    else:
        chosen = [p for p in trace.propositions if p in set(props)]
        missing = set(props) - set(trace.propositions)
        if missing:
            raise PropositionMismatchError(
                f"trace {trace.video_id!r} does not score propositions {sorted(missing)}"
            )

    states = [State(id=0, layer=0, label=None)]
    transitions: list[Transition] = []
    prev_ids = [0]
    next_id = 1
    n_props = len(chosen)

    for layer, frame in enumerate(trace.frames, start=1):
        probs = []
        for p in chosen:
            if p in frame.hard_labels:
                probs.append(1.0 if frame.hard_labels[p] else 0.0)
            else:
                probs.append(map_thresholded(model, frame.confidences[p]))

        layer_ids = []
        for mask in range(1 << n_props):
            weight = 1.0
            label = {}
            for i, p in enumerate(chosen):
                positive = bool(mask >> i & 1)
                label[p] = positive
                weight *= probs[i] if positive else 1.0 - probs[i]
            if weight > 0.0:
                sid = next_id
                next_id += 1
                states.append(State(id=sid, layer=layer, label=dict(sorted(label.items()))))
                layer_ids.append(sid)
                for src in prev_ids:
                    transitions.append(Transition(src=src, dst=sid, probability=weight))
        prev_ids = layer_ids

    return ProbabilisticAutomaton(
        video_id=trace.video_id,
        states=tuple(states),
        initial=0,
        accepting=frozenset(prev_ids),
        transitions=tuple(sorted(transitions, key=lambda t: (t.src, t.dst))),
    )


def validate(a: ProbabilisticAutomaton) -> list[Diagnostic]:
    """Check every structural invariant; returns diagnostics, empty when the
    automaton is well formed. Never raises."""
    out: list[Diagnostic] = []
    by_id = {s.id: s for s in a.states}

    if len(by_id) != len(a.states):
        out.append(Diagnostic("reference", "duplicate state ids"))
    none_labeled = [s for s in a.states if s.label is None]
    if len(none_labeled) != 1 or none_labeled[0].id != a.initial or none_labeled[0].layer != 0:
        out.append(Diagnostic(
            "initial",
            "expected exactly one unlabeled state, in layer 0, equal to the initial state",
        ))
    if a.initial not in by_id:
        out.append(Diagnostic("reference", f"initial state {a.initial} does not exist"))

    last_layer = max((s.layer for s in a.states), default=0)
    for t in a.transitions:
        if t.src not in by_id or t.dst not in by_id:
            out.append(Diagnostic("reference", f"transition {t.src}->{t.dst} references a missing state"))
            continue
        if by_id[t.dst].layer != by_id[t.src].layer + 1:
            out.append(Diagnostic(
                "layering",
                f"transition {t.src}->{t.dst} jumps layer {by_id[t.src].layer} to {by_id[t.dst].layer}",
            ))
        if not 0.0 < t.probability <= 1.0:
            out.append(Diagnostic(
                "probability",
                f"transition {t.src}->{t.dst} has probability {t.probability}, outside (0, 1]",
            ))

    outgoing: dict[int, float] = {s.id: 0.0 for s in a.states}
    incoming = {s.id: 0 for s in a.states}
    for t in a.transitions:
        if t.src in outgoing:
            outgoing[t.src] += t.probability
        if t.dst in incoming:
            incoming[t.dst] += 1

    for s in a.states:
        if s.layer < last_layer and abs(outgoing[s.id] - 1.0) > STOCHASTIC_TOL:
            out.append(Diagnostic(
                "stochasticity",
                f"state {s.id} (layer {s.layer}) has outgoing probability sum {outgoing[s.id]!r}",
            ))
        if s.id != a.initial and incoming[s.id] == 0:
            out.append(Diagnostic("reachability", f"state {s.id} has no incoming transitions"))

    expected_accepting = {s.id for s in a.states if s.layer == last_layer and s.layer > 0}
    if set(a.accepting) != expected_accepting:
        out.append(Diagnostic(
            "acceptance",
            f"accepting set {sorted(a.accepting)} differs from final layer {sorted(expected_accepting)}",
        ))
    return out


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


def automaton_to_dict(a: ProbabilisticAutomaton) -> dict:
    return {
        "video_id": a.video_id,
        "states": [
            {"id": s.id, "layer": s.layer,
             "label": dict(sorted(s.label.items())) if s.label is not None else None}
            for s in sorted(a.states, key=lambda s: (s.layer, s.id))
        ],
        "initial": a.initial,
        "accepting": sorted(a.accepting),
        "transitions": [
            {"from": t.src, "to": t.dst, "p": t.probability}
            for t in sorted(a.transitions, key=lambda t: (t.src, t.dst))
        ],
    }


def serialize(a: ProbabilisticAutomaton) -> bytes:
    """Deterministic UTF-8 JSON encoding of the automaton."""
    return (json.dumps(automaton_to_dict(a), indent=2, sort_keys=True) + "\n").encode("utf-8")


def automaton_from_dict(data: dict) -> ProbabilisticAutomaton:
    def fail(where: str, why: str) -> MalformedAutomatonError:
        return MalformedAutomatonError(f"{where}: {why}")

    if not isinstance(data, dict):
        raise fail("document", "expected a JSON object")
    try:
        video_id = str(data["video_id"])
        raw_states = data["states"]
        initial = int(data["initial"])
        raw_accepting = data["accepting"]
        raw_transitions = data["transitions"]
    except (KeyError, TypeError, ValueError) as exc:
        raise fail("document", f"missing or malformed field: {exc}") from exc

    states = []
    for i, s in enumerate(raw_states):
        try:
            label = s["label"]
            if label is not None:
                label = {str(k): bool(v) for k, v in label.items()}
            states.append(State(id=int(s["id"]), layer=int(s["layer"]), label=label))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise fail(f"states[{i}]", str(exc)) from exc
    ids = {s.id for s in states}
    if initial not in ids:
        raise fail("initial", f"unknown state id {initial}")

    accepting = set()
    for i, sid in enumerate(raw_accepting):
        if int(sid) not in ids:
            raise fail(f"accepting[{i}]", f"unknown state id {sid}")
        accepting.add(int(sid))

    transitions = []
    for i, t in enumerate(raw_transitions):
        try:
            src, dst, p = int(t["from"]), int(t["to"]), float(t["p"])
        except (KeyError, TypeError, ValueError) as exc:
            raise fail(f"transitions[{i}]", str(exc)) from exc
        if src not in ids:
            raise fail(f"transitions[{i}]", f"unknown state id {src}")
        if dst not in ids:
            raise fail(f"transitions[{i}]", f"unknown state id {dst}")
        transitions.append(Transition(src=src, dst=dst, probability=p))

    return ProbabilisticAutomaton(
        video_id=video_id,
        states=tuple(sorted(states, key=lambda s: (s.layer, s.id))),
        initial=initial,
        accepting=frozenset(accepting),
        transitions=tuple(sorted(transitions, key=lambda t: (t.src, t.dst))),
    )


def deserialize(data: bytes | str) -> ProbabilisticAutomaton:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise MalformedAutomatonError(f"not valid JSON: {exc}") from exc
    return automaton_from_dict(doc)


def save_automaton(a: ProbabilisticAutomaton, path: str | Path) -> None:
    Path(path).write_bytes(serialize(a))


def load_automaton(path: str | Path) -> ProbabilisticAutomaton:
    try:
        return deserialize(Path(path).read_bytes())
    except MalformedAutomatonError as exc:
        raise MalformedAutomatonError(f"{path}: {exc}") from exc


def trace_to_dict(trace: DetectionTrace) -> dict:
    frames = []
    for f in trace.frames:
        entry: dict = {"index": f.index, "timestamp_s": f.timestamp_s,
                       "confidences": dict(sorted(f.confidences.items()))}
        if f.hard_labels:
            entry["hard_labels"] = dict(sorted(f.hard_labels.items()))
        frames.append(entry)
    return {
        "video_id": trace.video_id,
        "frame_rate": trace.frame_rate,
        "propositions": list(trace.propositions),
        "frames": frames,
    }


def trace_from_dict(data: dict) -> DetectionTrace:
    if not isinstance(data, dict):
        raise MalformedTraceError("document: expected a JSON object")
    try:
        frames = tuple(
            Frame(
                index=int(f["index"]),
                timestamp_s=float(f["timestamp_s"]),
                confidences={str(k): float(v) for k, v in f.get("confidences", {}).items()},
                hard_labels={str(k): bool(v) for k, v in f.get("hard_labels", {}).items()},
            )
            for f in data["frames"]
        )
        return DetectionTrace(
            video_id=str(data["video_id"]),
            frame_rate=float(data["frame_rate"]),
            propositions=tuple(str(p) for p in data["propositions"]),
            frames=frames,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedTraceError(f"malformed detection trace: {exc}") from exc


def save_trace(trace: DetectionTrace, path: str | Path) -> None:
    Path(path).write_text(json.dumps(trace_to_dict(trace), indent=2) + "\n", encoding="utf-8")


def load_trace(path: str | Path) -> DetectionTrace:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedTraceError(f"{path}: not valid JSON: {exc}") from exc
    try:
        return trace_from_dict(data)
    except MalformedTraceError as exc:
        raise MalformedTraceError(f"{path}: {exc}") from exc
