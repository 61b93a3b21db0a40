"""Walk through confidence calibration: reliability bins, the fitted
logistic curve, and the threshold-saturated mapping used during automaton
construction.

Run from the repository root:  python demos/01_calibration.py
"""

from pathlib import Path

from vsearch import fit_logistic, load_model, map_confidence, map_thresholded

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

model = load_model(FIXTURES / "calibration.json")

print("Reliability data: detector confidence vs. fraction of correct detections")
print(f"{'interval':>16}  {'n':>5}  {'accuracy':>8}")
for b in model.bins:
    acc = "-" if b.accuracy is None else f"{b.accuracy:8.3f}"
    print(f"[{b.lo:5.3f}, {b.hi:5.3f})  {b.n:>5}  {acc}")

k, x0 = fit_logistic(model.bins)
print()
print(f"Weighted logistic fit over the bins: k = {k:.2f}, x0 = {x0:.4f}")
print(f"Shipped reference curve:             k = {model.k:.2f}, x0 = {model.x0:.4f}")
print(f"Saturation thresholds: confidences <= {model.t_false} map to 0, "
      f">= {model.t_true} map to 1")

print()
print("Sample points on the mapping:")
for c in (0.30, 0.45, 0.56, 0.60, 0.70):
    print(f"  confidence {c:.2f} -> smooth {map_confidence(model, c):.4f}, "
          f"thresholded {map_thresholded(model, c):.4f}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xs = [i / 500 for i in range(501)]
    fig, ax = plt.subplots(figsize=(6, 4))
    nonempty = [b for b in model.bins if b.n]
    ax.plot([b.midpoint for b in nonempty], [b.accuracy for b in nonempty],
            "o-", label="measured reliability")
    ax.plot(xs, [map_confidence(model, x) for x in xs], ":", label="fitted curve")
    ax.plot(xs, [map_thresholded(model, x) for x in xs], "--", label="thresholded")
    ax.set_xlabel("detector confidence")
    ax.set_ylabel("probability of a correct detection")
    ax.legend()
    out = Path(__file__).with_suffix(".png")
    fig.savefig(out, dpi=120, bbox_inches="tight")
    print(f"\nWrote {out}")
except ImportError:
    print("\n(matplotlib not installed; skipping the plot)")
