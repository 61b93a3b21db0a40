"""Frame extraction, detection, and calibration-sample generation.

Output follows the vsearch file contracts: detection traces as
``{"video_id", "frame_rate", "propositions", "frames": [...]}`` and
calibration samples as ``[{"confidence", "correct"}]``. Absent detections
are recorded as confidence 0; multiple hits for one proposition keep the
maximum confidence.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np

from .backends import make_backend


class MediaError(RuntimeError):
    """The input video or image set cannot be read."""


def normalize_proposition(phrase: str) -> str:
    """Identifier form of a noun phrase ("stop sign" -> "stop_sign").

    Trace files must key propositions by identifiers so that formulas can
    reference them; the detector still sees the natural phrase.
    """
    s = re.sub(r"[\s\-]+", "_", phrase.strip().lower())
    s = re.sub(r"[^a-z0-9_]", "", s)
    s = re.sub(r"_+", "_", s).strip("_").lstrip("0123456789_")
    if not s:
        raise ValueError(f"phrase {phrase!r} is empty after normalization")
    return s


@dataclass(frozen=True)
class AdapterConfig:
    backend: str = "color_prior"
    frame_rate: float = 1.0
    propositions: tuple[str, ...] = ()
    device: str = "cpu"
    seed: int = 0

    def __post_init__(self):
        if self.frame_rate <= 0:
            raise ValueError(f"frame rate must be positive, got {self.frame_rate}")


@dataclass(frozen=True)
class ExtractedFrame:
    index: int
    timestamp_s: float
    image: np.ndarray = field(repr=False, compare=False)


def extract_frames(video_path: str | Path, frame_rate: float) -> list[ExtractedFrame]:
    """Sample frames from a video at ``frame_rate`` frames per second.

    Indices are dense from 0; timestamps are the sampled positions in the
    source timeline.
    """
    if frame_rate <= 0:
        raise ValueError(f"frame rate must be positive, got {frame_rate}")
    cap = cv2.VideoCapture(str(video_path))
    if not cap.isOpened():
        raise MediaError(f"cannot open video {video_path}")
    native_fps = cap.get(cv2.CAP_PROP_FPS)
    if not native_fps or native_fps <= 0:
        native_fps = 30.0

    frames: list[ExtractedFrame] = []
    step = 1.0 / frame_rate
    next_t = 0.0
    raw_index = 0
    while True:
        ok, image = cap.read()
        if not ok:
            break
        t = raw_index / native_fps
        if t + 1e-9 >= next_t:
            frames.append(ExtractedFrame(index=len(frames), timestamp_s=round(next_t, 6),
                                         image=image))
            next_t += step
        raw_index += 1
    cap.release()
    if not frames:
        raise MediaError(f"video {video_path} contains no frames")
    return frames


def detect(frames: list[ExtractedFrame], propositions: list[str],
           config: AdapterConfig | None = None, video_id: str = "video") -> dict:
    """Score every (frame, proposition) pair and emit a detection trace
    document matching the vsearch trace schema."""
    if not frames:
        raise MediaError("no frames to run detection on")
    if not propositions:
        raise ValueError("no propositions given")
    config = config or AdapterConfig()
    backend = make_backend(config.backend, **({"device": config.device}
                                              if config.backend == "owlvit" else {}))
    names = {phrase: normalize_proposition(phrase) for phrase in propositions}
    if len(set(names.values())) != len(names):
        raise ValueError(f"propositions collide after normalization: {sorted(names.values())}")
    out_frames = []
    for frame in frames:
        confidences = {}
        for phrase, name in names.items():
            score = float(backend.score(frame.image, phrase))
            confidences[name] = min(max(score, 0.0), 1.0)
        out_frames.append({
            "index": frame.index,
            "timestamp_s": frame.timestamp_s,
            "confidences": dict(sorted(confidences.items())),
        })
    return {
        "video_id": video_id,
        "frame_rate": config.frame_rate,
        "propositions": [names[p] for p in propositions],
        "frames": out_frames,
    }


def detect_video(video_path: str | Path, config: AdapterConfig) -> dict:
    frames = extract_frames(video_path, config.frame_rate)
    return detect(frames, list(config.propositions), config,
                  video_id=Path(video_path).stem)


def build_calibration_samples(image_paths: list[str | Path], labels: dict[str, str],
                              config: AdapterConfig | None = None) -> list[dict]:
    """Score each image against the complete label list; the top detection's
    confidence is paired with whether it matches the image's own label."""
    if not image_paths:
        raise MediaError("no images given")
    config = config or AdapterConfig()
    backend = make_backend(config.backend, **({"device": config.device}
                                              if config.backend == "owlvit" else {}))
    vocabulary = sorted(set(labels.values()))
    if not vocabulary:
        raise ValueError("label map is empty")

    samples = []
    for path in image_paths:
        name = Path(path).name
        if name not in labels:
            raise MediaError(f"no label for image {name}")
        image = cv2.imread(str(path))
        if image is None:
            raise MediaError(f"cannot read image {path}")
        scores = {label: float(backend.score(image, label)) for label in vocabulary}
        top_label = max(sorted(scores), key=scores.get)
        samples.append({
            "confidence": min(max(scores[top_label], 0.0), 1.0),
            "correct": top_label == labels[name],
        })
    return samples


def save_json(doc, path: str | Path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
