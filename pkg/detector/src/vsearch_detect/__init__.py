"""Detector adapter: produce vsearch detection traces from videos and
calibration samples from labelled images. The only component that touches
ML runtimes; everything else consumes its JSON outputs."""

__version__ = "0.1.0"

from .adapter import (
    AdapterConfig,
    ExtractedFrame,
    MediaError,
    build_calibration_samples,
    detect,
    detect_video,
    extract_frames,
    save_json,
)
from .backends import BackendUnavailableError, ColorPriorBackend, OwlVitBackend, make_backend
