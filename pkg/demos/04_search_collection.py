"""Search a small collection of videos for a privacy rule, then search a
long recording chunk by chunk.

Run from the repository root:  python demos/04_search_collection.py
"""

import random
from pathlib import Path

from vsearch import DetectionTrace, Frame, invert_mapping, load_model, load_spec, load_trace, search

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

model = load_model(FIXTURES / "calibration.json")
spec = load_spec(FIXTURES / "specs" / "faces_privacy.json")


def synthetic_trace(rng, names, n_frames, video_id):
    """Random confidences: mostly saturated detections, some ambiguous."""
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
    return DetectionTrace(video_id, 1.0, tuple(names), tuple(frames))

traces = [load_trace(FIXTURES / "traces" / f"campus_{i:02d}.json") for i in (1, 2, 3)]
print("Searching three campus videos for 'never show faces' (threshold 0.5):")
for r in search(traces, spec, model, threshold=0.5):
    verdict = "INCLUDED" if r.included else "excluded"
    print(f"  {r.video_id}: P = {r.probabilities['phi']:.4f}  {verdict}")

print()
print("Chunked search over a five-minute synthetic dashcam recording:")
driving_spec = load_spec(FIXTURES / "specs" / "driving_rules.json")
rng = random.Random(7)
long_trace = synthetic_trace(
    rng, sorted(p.name for p in driving_spec.propositions), 300, "dashcam")
for r in search([long_trace], driving_spec, model, chunk_len=30):
    probs = "  ".join(f"{fid}={r.probabilities[fid]:.2f}"
                      for fid in sorted(r.probabilities))
    verdict = "INCLUDED" if r.included else "excluded"
    print(f"  {r.video_id:>10}: {probs}  {verdict}")
