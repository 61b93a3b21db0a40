"""Command line: turn a video into a detection trace, or a labelled image
directory into calibration samples.

    vsearch-detect --video V --fps R --props p1,p2 -o trace.json
    vsearch-detect calib --images DIR --labels labels.json -o samples.json
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .adapter import AdapterConfig, MediaError, build_calibration_samples, detect_video, save_json
from .backends import BackendUnavailableError


def _trace_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vsearch-detect",
                                description="Run a detector over a video and write a detection trace.")
    p.add_argument("--video", required=True)
    p.add_argument("--fps", type=float, default=1.0)
    p.add_argument("--props", required=True, help="comma-separated propositions")
    p.add_argument("--backend", default="color_prior")
    p.add_argument("--device", default="cpu")
    p.add_argument("-o", "--output", required=True)
    return p


def _calib_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vsearch-detect calib",
                                description="Score labelled images and write calibration samples.")
    p.add_argument("--images", required=True, help="directory of image files")
    p.add_argument("--labels", required=True, help="JSON map of filename to label")
    p.add_argument("--backend", default="color_prior")
    p.add_argument("--device", default="cpu")
    p.add_argument("-o", "--output", required=True)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if argv and argv[0] == "calib":
            args = _calib_parser().parse_args(argv[1:])
            labels = json.loads(Path(args.labels).read_text(encoding="utf-8"))
            images = sorted(
                p for p in Path(args.images).iterdir()
                if p.suffix.lower() in (".png", ".jpg", ".jpeg", ".bmp")
            )
            config = AdapterConfig(backend=args.backend, device=args.device)
            samples = build_calibration_samples(images, labels, config)
            save_json(samples, args.output)
            print(f"{len(samples)} samples -> {args.output}")
        else:
            args = _trace_parser().parse_args(argv)
            props = tuple(p.strip() for p in args.props.split(",") if p.strip())
            config = AdapterConfig(backend=args.backend, frame_rate=args.fps,
                                   propositions=props, device=args.device)
            trace = detect_video(args.video, config)
            save_json(trace, args.output)
            print(f"{len(trace['frames'])} frames, {len(props)} propositions -> {args.output}")
        return 0
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    except (MediaError, BackendUnavailableError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
