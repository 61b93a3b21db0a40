"""Confidence calibration: reliability binning, logistic curve fitting, and
the threshold-saturated confidence-to-probability mapping.

The calibrated mapping is ``f(x) = 1 / (1 + exp(-k (x - x0)))``; the
thresholded variant saturates to 1 at or above ``t_true`` and to 0 at or
below ``t_false``, which prunes near-certain branches during automaton
construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import CalibrationError, ConfidenceDomainError, DegenerateDataError


@dataclass(frozen=True)
class CalibrationSample:
    """One detection outcome: the detector's confidence and whether the
    detection was actually correct."""

    confidence: float
    correct: bool

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ConfidenceDomainError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class ReliabilityBin:
    """Counts for one confidence interval ``[lo, hi)``.

    ``correct`` is a count and is integral for measured data; fractional
    values are permitted so that bins can be generated exactly from a
    reference curve.
    """

    lo: float
    hi: float
    n: int
    correct: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise CalibrationError(f"bin bounds out of order: [{self.lo}, {self.hi})")
        if self.n < 0 or not 0 <= self.correct <= max(self.n, 0):
            raise CalibrationError(f"bad bin counts: n={self.n}, correct={self.correct}")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def accuracy(self) -> float | None:
        """Fraction of correct detections, or ``None`` for an empty bin."""
        return self.correct / self.n if self.n else None


@dataclass(frozen=True)
class CalibrationModel:
    """Fitted logistic parameters plus saturation thresholds.

    ``bins`` records the reliability data the curve was fitted from.
    """

    k: float
    x0: float
    t_true: float
    t_false: float
    bin_width: float = 0.02
    bins: tuple[ReliabilityBin, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.k <= 0:
            raise CalibrationError(f"logistic steepness must be positive, got {self.k}")
        if not 0.0 <= self.x0 <= 1.0:
            raise CalibrationError(f"logistic midpoint {self.x0} outside [0, 1]")
        if not self.t_false < self.t_true:
            raise CalibrationError(
                f"thresholds out of order: t_false={self.t_false} must be below t_true={self.t_true}"
            )


def _logistic(k: float, x0: float, x: float) -> float:
    z = -k * (x - x0)
    if z > 700.0:
        return 0.0
    if z < -700.0:
        return 1.0
    return 1.0 / (1.0 + math.exp(z))


def map_confidence(model: CalibrationModel, c: float) -> float:
    """Smooth confidence-to-probability mapping (no threshold saturation)."""
    if not 0.0 <= c <= 1.0:
        raise ConfidenceDomainError(f"confidence {c} outside [0, 1]")
    return _logistic(model.k, model.x0, c)


def map_thresholded(model: CalibrationModel, c: float) -> float:
    """Thresholded mapping: 1 at or above ``t_true``, 0 at or below
    ``t_false``, the smooth mapping in between."""
    if not 0.0 <= c <= 1.0:
        raise ConfidenceDomainError(f"confidence {c} outside [0, 1]")
    if c >= model.t_true:
        return 1.0
    if c <= model.t_false:
        return 0.0
    return _logistic(model.k, model.x0, c)


def invert_mapping(model: CalibrationModel, p: float) -> float:
    """Confidence whose smooth mapping equals ``p`` (0 < p < 1)."""
    if not 0.0 < p < 1.0:
        raise ConfidenceDomainError(f"target probability {p} outside (0, 1)")
    return model.x0 + math.log(p / (1.0 - p)) / model.k


def bin_samples(samples: Sequence[CalibrationSample], bin_width: float = 0.02) -> list[ReliabilityBin]:
    """Partition [0, 1] into bins of ``bin_width`` and count samples.

    The last bin is closed at 1. Bins with no samples are returned with
    ``n = 0`` (accuracy undefined), not dropped.
    """
    if not samples:
        raise CalibrationError("no calibration samples given")
    if not 0.0 < bin_width <= 1.0:
        raise CalibrationError(f"bin width {bin_width} outside (0, 1]")
    n_bins = math.ceil(round(1.0 / bin_width, 9))
    edges = [min(i * bin_width, 1.0) for i in range(n_bins + 1)]
    edges[-1] = 1.0

    counts = [0] * n_bins
    corrects = [0] * n_bins
    for s in samples:
        i = min(int(s.confidence / bin_width), n_bins - 1)
        # Guard against float drift onto a neighbouring edge.
        if i + 1 < n_bins and s.confidence >= edges[i + 1]:
            i += 1
        elif i > 0 and s.confidence < edges[i]:
            i -= 1
        counts[i] += 1
        corrects[i] += int(s.correct)

    return [
        ReliabilityBin(lo=edges[i], hi=edges[i + 1], n=counts[i], correct=corrects[i])
        for i in range(n_bins)
    ]


def _weighted_sse(k: float, x0: float, xs: np.ndarray, ys: np.ndarray, ws: np.ndarray) -> float:
    z = np.clip(-k * (xs - x0), -700.0, 700.0)
    pred = 1.0 / (1.0 + np.exp(z))
    # For targets near 1 the direct residual cancels catastrophically once
    # the curve saturates; 1 - pred computed as 1/(1 + e^{-z}) stays exact.
    pred_comp = 1.0 / (1.0 + np.exp(-z))
    residual = np.where(ys <= 0.5, pred - ys, (1.0 - ys) - pred_comp)
    return float(np.sum(ws * residual**2))


def _golden_min(fn, lo: float, hi: float, tol: float = 1e-10) -> float:
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


K_MAX = 500.0


def fit_logistic(bins: Iterable[ReliabilityBin]) -> tuple[float, float]:
    """Fit ``(k, x0)`` minimizing the n-weighted squared error between the
    logistic curve at each bin midpoint and the bin accuracy.

    Deterministic: a coarse grid over ``(k, x0)`` followed by coordinate
    descent with golden-section refinement. Empty bins are ignored. Raises
    :class:`DegenerateDataError` when fewer than two nonempty bins exist or
    all accuracies coincide.
    """
    usable = [b for b in bins if b.n > 0]
    if len(usable) < 2:
        raise DegenerateDataError("need at least two nonempty reliability bins")
    accs = {b.correct / b.n for b in usable}
    if len(accs) < 2:
        raise DegenerateDataError("all bin accuracies are equal; midpoint unidentifiable")

    xs = np.array([b.midpoint for b in usable])
    ys = np.array([b.correct / b.n for b in usable])
    ws = np.array([float(b.n) for b in usable])

    def objective(k: float, x0: float) -> float:
        return _weighted_sse(k, x0, xs, ys, ws)

    k_grid = np.geomspace(0.5, K_MAX, 48)
    x0_grid = np.linspace(0.0, 1.0, 101)
    best = (math.inf, float(k_grid[0]), float(x0_grid[0]))
    for k in k_grid:
        for x0 in x0_grid:
            val = objective(k, x0)
            if val < best[0]:
                best = (val, float(k), float(x0))
    _, k, x0 = best

    # Coordinate descent with golden-section line searches. The bracket for
    # each coordinate tracks the size of its last move so it neither stalls
    # short of the valley floor nor shrinks faster than the iterate travels.
    k_step, x0_step = max(0.6 * k, 1.0), 0.05
    for _ in range(200):
        new_k = _golden_min(lambda v: objective(v, x0), max(k - k_step, 1e-9), min(k + k_step, K_MAX))
        new_x0 = _golden_min(lambda v: objective(new_k, v), max(x0 - x0_step, 0.0), min(x0 + x0_step, 1.0))
        move_k, move_x0 = abs(new_k - k), abs(new_x0 - x0)
        k, x0 = new_k, new_x0
        k_step = max(4.0 * move_k, 0.5 * k_step)
        x0_step = max(4.0 * move_x0, 0.5 * x0_step)
        if move_k < 1e-9 * max(1.0, k) and move_x0 < 1e-10 and k_step < 1e-6 and x0_step < 1e-8:
            break
    return k, x0


def derive_thresholds(bins: Iterable[ReliabilityBin]) -> tuple[float, float]:
    """Saturation thresholds ``(t_false, t_true)`` read off the bins.

    ``t_true`` is the lowest bin midpoint from which every nonempty bin has
    accuracy 1; ``t_false`` is the highest midpoint below which every
    nonempty bin has accuracy 0. Defaults to (0, 1) when no saturated run
    exists.
    """
    usable = sorted((b for b in bins if b.n > 0), key=lambda b: b.midpoint)
    if not usable:
        raise DegenerateDataError("no nonempty reliability bins")
    t_true = 1.0
    for b in reversed(usable):
        if b.correct / b.n == 1.0:
            t_true = b.midpoint
        else:
            break
    t_false = 0.0
    for b in usable:
        if b.correct / b.n == 0.0:
            t_false = b.midpoint
        else:
            break
    if not t_false < t_true:
        raise DegenerateDataError(
            f"derived thresholds overlap (t_false={t_false}, t_true={t_true}); "
            "the reliability data has no usable saturated tails"
        )
    return t_false, t_true


def fit_model(samples: Sequence[CalibrationSample], bin_width: float = 0.02) -> CalibrationModel:
    """Bin samples, fit the logistic curve, and derive thresholds."""
    bins = bin_samples(samples, bin_width)
    k, x0 = fit_logistic(bins)
    t_false, t_true = derive_thresholds(bins)
    return CalibrationModel(k=k, x0=x0, t_true=t_true, t_false=t_false,
                            bin_width=bin_width, bins=tuple(bins))


# ---------------------------------------------------------------------------
# File format
# ---------------------------------------------------------------------------


def model_to_dict(model: CalibrationModel) -> dict:
    return {
        "k": model.k,
        "x0": model.x0,
        "t_true": model.t_true,
        "t_false": model.t_false,
        "bin_width": model.bin_width,
        "bins": [
            {"lo": b.lo, "hi": b.hi, "n": b.n,
             "correct": int(b.correct) if float(b.correct).is_integer() else b.correct}
            for b in model.bins
        ],
    }


def model_from_dict(data: dict) -> CalibrationModel:
    try:
        bins = tuple(
            ReliabilityBin(lo=float(b["lo"]), hi=float(b["hi"]), n=int(b["n"]), correct=b["correct"])
            for b in data.get("bins", [])
        )
        return CalibrationModel(
            k=float(data["k"]),
            x0=float(data["x0"]),
            t_true=float(data["t_true"]),
            t_false=float(data["t_false"]),
            bin_width=float(data.get("bin_width", 0.02)),
            bins=bins,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CalibrationError(f"malformed calibration data: {exc}") from exc


def save_model(model: CalibrationModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> CalibrationModel:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CalibrationError(f"{path}: not valid JSON: {exc}") from exc
    return model_from_dict(data)


def load_samples(path: str | Path) -> list[CalibrationSample]:
    """Read a samples file: a JSON array of {"confidence": r, "correct": bool}."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CalibrationError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise CalibrationError(f"{path}: expected a JSON array of samples")
    out = []
    for i, entry in enumerate(data):
        try:
            out.append(CalibrationSample(confidence=float(entry["confidence"]),
                                         correct=bool(entry["correct"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise CalibrationError(f"{path}: samples[{i}]: {exc}") from exc
    return out
