"""Translate natural-language rules into temporal-logic specifications via
the two-stage prompting flow, answered offline by the canned fixture
backend.

Run from the repository root:  python demos/05_rules_to_spec.py
"""

from pathlib import Path

from vsearch import FixtureBackend, RuleSet, extract_noun_phrases, rules_to_ltlf
from vsearch.nl2spec import noun_phrase_prompt, translation_prompt

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

backend = FixtureBackend(FIXTURES / "nl2spec" / "canned_responses.json")
rules = RuleSet.from_file(FIXTURES / "rules" / "privacy.txt")

print("Rules:")
for i, rule in enumerate(rules.rules, start=1):
    print(f"  {i}. {rule}")

print()
print("Stage 1 prompt:")
print("  " + noun_phrase_prompt(rules).replace("\n", "\n  "))
phrases = extract_noun_phrases(rules, backend)
print("Extracted noun phrases:", ", ".join(phrases))

print()
print("Stage 2 prompt:")
print("  " + translation_prompt(rules, phrases).replace("\n", "\n  "))
spec = rules_to_ltlf(rules, phrases, backend)
print("Specification set:")
print("  propositions:", ", ".join(sorted(p.name for p in spec.propositions)))
for fid, formula, rule_idx in spec.formulas:
    print(f"  {fid} (from rule {rule_idx + 1}): {formula}")
