import random
from pathlib import Path

import pytest

from vsearch import ltlf
from vsearch.automaton import DetectionTrace, Frame
from vsearch.calibration import CalibrationModel, invert_mapping, load_model

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def model() -> CalibrationModel:
    return load_model(FIXTURES / "calibration.json")


def confidence_for(model: CalibrationModel, p: float) -> float:
    """Raw confidence whose thresholded mapping is exactly p (0, 1 included)."""
    if p == 0.0:
        return 0.10
    if p == 1.0:
        return 0.80
    return invert_mapping(model, p)


def trace_from_probs(model, video_id, prop_probs, frame_rate=1.0) -> DetectionTrace:
    """Build a trace whose mapped probabilities equal ``prop_probs``:
    a mapping of proposition name to one probability per frame."""
    names = tuple(prop_probs)
    n = len(next(iter(prop_probs.values())))
    frames = []
    for i in range(n):
        confs = {p: confidence_for(model, prop_probs[p][i]) for p in names}
        frames.append(Frame(index=i, timestamp_s=float(i), confidences=confs))
    return DetectionTrace(video_id=video_id, frame_rate=frame_rate,
                          propositions=names, frames=tuple(frames))


def random_formula(rng: random.Random, names: list[str], depth: int) -> ltlf.Formula:
    """Uniform-ish random formula of bounded depth over the given atoms."""
    if depth == 0 or rng.random() < 0.25:
        roll = rng.random()
        if roll < 0.8:
            return ltlf.atom(rng.choice(names))
        return ltlf.TRUE if roll < 0.9 else ltlf.FALSE
    kind = rng.choice(["not", "and", "or", "xor", "implies", "iff",
                       "next", "always", "eventually", "until"])
    sub = lambda: random_formula(rng, names, depth - 1)
    if kind == "not":
        return ltlf.Not(sub())
    if kind == "next":
        return ltlf.Next(sub())
    if kind == "always":
        return ltlf.Always(sub())
    if kind == "eventually":
        return ltlf.Eventually(sub())
    binary = {"and": ltlf.And, "or": ltlf.Or, "xor": ltlf.Xor,
              "implies": ltlf.Implies, "iff": ltlf.Iff, "until": ltlf.Until}
    return binary[kind](sub(), sub())


def random_soft_trace(rng: random.Random, model, names, n_frames, video_id="rand") -> DetectionTrace:
    """Random trace mixing saturated and interior mapped probabilities."""
    frames = []
    for i in range(n_frames):
        confs = {}
        for p in names:
            roll = rng.random()
            if roll < 0.35:
                confs[p] = 0.10
            elif roll < 0.70:
                confs[p] = 0.80
            else:
                confs[p] = invert_mapping(model, rng.uniform(0.05, 0.95))
        frames.append(Frame(index=i, timestamp_s=float(i), confidences=confs))
    return DetectionTrace(video_id=video_id, frame_rate=1.0,
                          propositions=tuple(names), frames=tuple(frames))
