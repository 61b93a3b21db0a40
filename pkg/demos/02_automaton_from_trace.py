"""Compile a detection trace into its layered probabilistic automaton and
inspect the result.

Run from the repository root:  python demos/02_automaton_from_trace.py
"""

from pathlib import Path

from vsearch import frames_to_automaton, load_model, load_trace, validate

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

model = load_model(FIXTURES / "calibration.json")
trace = load_trace(FIXTURES / "traces" / "campus_01.json")

print(f"Video {trace.video_id!r}: {len(trace.frames)} frames at {trace.frame_rate} fps,")
print(f"propositions: {', '.join(trace.propositions)}")
print()
print("Raw detector confidences per frame:")
for f in trace.frames:
    scores = ", ".join(f"{p}={c:.3f}" for p, c in f.confidences.items())
    print(f"  t={f.timestamp_s:4.1f}s  {scores}")

aut = frames_to_automaton(trace, model)
print()
print(f"Automaton: {len(aut.states)} states in {aut.n_layers} layers, "
      f"{len(aut.transitions)} transitions")
for layer in range(aut.n_layers + 1):
    parts = []
    for s in aut.layer_states(layer):
        if s.label is None:
            parts.append(f"q{s.id}<start>")
        else:
            lit = " & ".join(p if v else f"!{p}" for p, v in s.label.items())
            parts.append(f"q{s.id}[{lit}]")
    print(f"  layer {layer}: " + "   ".join(parts))

print()
print("Transitions (every edge into a state carries that state's probability):")
for t in aut.transitions:
    print(f"  q{t.src} -> q{t.dst}  p={t.probability:.4f}")

problems = validate(aut)
print()
print("Validation:", "clean" if not problems else "; ".join(map(str, problems)))
