"""Evaluate verification scores against ground-truth annotations: interval
precision, cumulative recall, and search accuracy, written out as CSV.

Run from the repository root:  python demos/06_metrics_report.py
"""

import tempfile
from pathlib import Path

from vsearch import GroundTruth, SearchResult, emit_report, metrics_table

# A small annotated cohort: (video, probability from the checker, truth).
COHORT = [
    ("v01", 0.02, False), ("v02", 0.03, False), ("v03", 0.04, True),
    ("v04", 0.12, False), ("v05", 0.18, False), ("v06", 0.22, False),
    ("v07", 0.33, True),  ("v08", 0.42, False), ("v09", 0.48, False),
    ("v10", 0.52, True),  ("v11", 0.57, False), ("v12", 0.63, True),
    ("v13", 0.68, True),  ("v14", 0.72, False), ("v15", 0.77, True),
    ("v16", 0.84, True),  ("v17", 0.88, True),  ("v18", 0.93, True),
    ("v19", 0.97, True),  ("v20", 0.99, True),
]

results = [SearchResult(vid, {"phi": p}, p > 0.5, 0.5) for vid, p, _ in COHORT]
gt = GroundTruth({vid: {"phi": sat} for vid, _, sat in COHORT})

rows = metrics_table(results, gt, ["phi"], n_intervals=20)
print(f"{'interval':>14} {'n':>3} {'precision':>9} {'recall':>7} {'accuracy':>8}")
for r in rows:
    cell = lambda v: "     -" if v is None else f"{v:6.3f}"
    print(f"[{r.lo:4.2f}, {r.hi:4.2f}) {r.n:>3} {cell(r.precision):>9} "
          f"{cell(r.recall):>7} {cell(r.accuracy):>8}")

out = Path(tempfile.gettempdir()) / "vsearch_metrics_demo.csv"
emit_report(rows, out)
print(f"\nWrote {out}")
