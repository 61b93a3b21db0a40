"""Detector backends scoring (image, phrase) pairs with a confidence in
[0, 1].

``color_prior`` is the default: a deterministic, dependency-light heuristic
that scores a phrase by how much of the image matches the color it names
(directly, or through a small object-to-color prior). It exists so the
pipeline runs end to end offline; swap in ``owlvit`` for real
open-vocabulary detection when model weights are available.
"""

from __future__ import annotations

import re

import numpy as np


class BackendUnavailableError(RuntimeError):
    """The requested backend cannot be loaded in this environment."""


# Hue ranges on OpenCV's 0-179 scale, plus value/saturation gates for the
# achromatic colors.
_HUE_RANGES = {
    "red": [(0, 10), (170, 179)],
    "orange": [(10, 22)],
    "yellow": [(22, 35)],
    "green": [(35, 85)],
    "blue": [(90, 130)],
    "purple": [(130, 155)],
}
_ACHROMATIC = {"white", "black", "gray", "grey"}

# Common traffic / signage vocabulary without an explicit color word.
_OBJECT_COLOR_PRIOR = {
    "stop_sign": "red",
    "stop": "red",
    "fire_hydrant": "red",
    "brake_light": "red",
    "red_light": "red",
    "green_light": "green",
    "yellow_light": "yellow",
    "traffic_cone": "orange",
    "sky": "blue",
    "grass": "green",
    "vegetation": "green",
}


def _phrase_color(phrase: str) -> str | None:
    words = [w for w in re.split(r"[\s_\-]+", phrase.lower()) if w]
    key = "_".join(words)
    if key in _OBJECT_COLOR_PRIOR:
        return _OBJECT_COLOR_PRIOR[key]
    for word in words:
        if word in _HUE_RANGES or word in _ACHROMATIC:
            return word
        if word in _OBJECT_COLOR_PRIOR:
            return _OBJECT_COLOR_PRIOR[word]
    return None


class ColorPriorBackend:
    """Deterministic color-coverage scores; unknown phrases score 0."""

    name = "color_prior"

    def __init__(self, coverage_gain: float = 8.0):
        self.coverage_gain = coverage_gain

    def score(self, image_bgr: np.ndarray, phrase: str) -> float:
        import cv2

        color = _phrase_color(phrase)
        if color is None:
            return 0.0
        hsv = cv2.cvtColor(image_bgr, cv2.COLOR_BGR2HSV)
        h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
        if color == "black":
            mask = v < 50
        elif color in ("gray", "grey"):
            mask = (s < 40) & (v >= 50) & (v < 200)
        elif color == "white":
            mask = (s < 40) & (v >= 200)
        else:
            mask = np.zeros(h.shape, dtype=bool)
            for lo, hi in _HUE_RANGES[color]:
                mask |= (h >= lo) & (h <= hi)
            mask &= (s >= 80) & (v >= 60)
        coverage = float(np.count_nonzero(mask)) / mask.size
        return float(1.0 - np.exp(-self.coverage_gain * coverage))


class OwlVitBackend:
    """Open-vocabulary detection through an OWL-ViT checkpoint.

    Scores a phrase with the maximum box confidence for that query. Needs
    the ``owlvit`` extra installed and the checkpoint weights available.
    """

    name = "owlvit"

    def __init__(self, checkpoint: str = "google/owlvit-base-patch32", device: str = "cpu"):
        try:
            import torch
            from transformers import OwlViTForObjectDetection, OwlViTProcessor
        except ImportError as exc:
            raise BackendUnavailableError(
                "owlvit backend needs the 'owlvit' extra (torch, transformers, Pillow)"
            ) from exc
        try:
            self._processor = OwlViTProcessor.from_pretrained(checkpoint)
            self._model = OwlViTForObjectDetection.from_pretrained(checkpoint).to(device).eval()
        except Exception as exc:
            raise BackendUnavailableError(
                f"cannot load OWL-ViT checkpoint {checkpoint!r}: {exc}"
            ) from exc
        self._torch = torch
        self.device = device

    def score(self, image_bgr: np.ndarray, phrase: str) -> float:
        from PIL import Image

        image = Image.fromarray(image_bgr[..., ::-1])
        inputs = self._processor(text=[[phrase]], images=image, return_tensors="pt").to(self.device)
        with self._torch.no_grad():
            outputs = self._model(**inputs)
        scores = self._torch.sigmoid(outputs.logits[0, :, 0])
        return float(scores.max().item()) if scores.numel() else 0.0


_BACKENDS = {
    ColorPriorBackend.name: ColorPriorBackend,
    OwlVitBackend.name: OwlVitBackend,
}


def make_backend(name: str, **kwargs):
    if name not in _BACKENDS:
        raise BackendUnavailableError(
            f"unknown detector backend {name!r}; available: {', '.join(sorted(_BACKENDS))}"
        )
    return _BACKENDS[name](**kwargs)
