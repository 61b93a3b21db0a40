"""Check temporal-logic rules against automata: the product dynamic program
against its explicit-enumeration oracle.

Run from the repository root:  python demos/03_probability_check.py
"""

from pathlib import Path

from vsearch import (
    check_probability,
    enumerate_probability,
    frames_to_automaton,
    load_automaton,
    load_model,
    load_spec,
    load_trace,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

model = load_model(FIXTURES / "calibration.json")
spec = load_spec(FIXTURES / "specs" / "faces_privacy.json")
phi = spec.by_id()["phi"]

print("Rule: never show faces  --  formula", phi)
print()
for vid in ("campus_01", "campus_02", "campus_03"):
    trace = load_trace(FIXTURES / "traces" / f"{vid}.json")
    aut = frames_to_automaton(trace, model)
    fast = check_probability(aut, phi)
    slow = enumerate_probability(aut, phi)
    print(f"{vid}: P = {fast.probability:.4f} ({fast.probability:.2%})   "
          f"oracle over {slow.trajectory_count_checked} trajectories agrees to "
          f"{abs(fast.probability - slow.probability):.1e}")

print()
print("A multi-proposition automaton loaded from disk:")
crossing = load_automaton(FIXTURES / "automata" / "crossing_cam_01.json")
tspec = load_spec(FIXTURES / "specs" / "traffic_recording.json")
for fid, formula, _ in tspec.formulas:
    p = check_probability(crossing, formula).probability
    print(f"  {fid}: {formula}  ->  {p:.2%}")
