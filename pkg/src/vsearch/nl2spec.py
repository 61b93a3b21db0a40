"""Natural-language rules to temporal-logic specifications.

Two-stage prompting against a pluggable text-generation backend: first
extract noun phrases (the atomic propositions), then translate each rule
into a formula over those propositions. Completions must be numbered
lists; anything else is surfaced as an error rather than repaired. A
canned-fixture backend answers from a JSON file keyed by prompt hash, so
tests and demos run offline and deterministically.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Protocol

import requests

from . import ltlf
from .errors import (
    BackendError,
    InputFormatError,
    InvalidPropositionError,
    TranslationError,
    UnparseableCompletionError,
    VsearchError,
)
from .ltlf import Formula, Proposition

TOKEN_ENV_VAR = "VSEARCH_NL_TOKEN"


@dataclass(frozen=True)
class RuleSet:
    """An ordered list of natural-language rules."""

    rules: tuple[str, ...]

    def __post_init__(self):
        if not self.rules:
            raise InputFormatError("rule set is empty")
        for i, rule in enumerate(self.rules):
            if not rule.strip():
                raise InputFormatError(f"rule {i + 1} is blank")

    @classmethod
    def from_file(cls, path: str | Path) -> "RuleSet":
        lines = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines()]
        return cls(tuple(ln for ln in lines if ln))


@dataclass(frozen=True)
class SpecSet:
    """Propositions plus named formulas, as produced by translation."""

    propositions: frozenset[Proposition]
    formulas: tuple[tuple[str, Formula, int], ...]  # (id, formula, source rule index)

    def __post_init__(self):
        declared = {p.name for p in self.propositions}
        for fid, formula, _ in self.formulas:
            for p in ltlf.extract_propositions(formula):
                if p.name not in declared:
                    raise InputFormatError(
                        f"formula {fid!r} uses undeclared proposition {p.name!r}"
                    )

    def formula_ids(self) -> list[str]:
        return [fid for fid, _, _ in self.formulas]

    def by_id(self) -> dict[str, Formula]:
        return {fid: f for fid, f, _ in self.formulas}


class NlBackend(Protocol):
    def complete(self, prompt: str) -> str: ...


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class FixtureBackend:
    """Answers prompts from a JSON map of sha256(prompt) -> completion."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        try:
            self._table = json.loads(self.path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise BackendError(f"cannot load fixture {self.path}: {exc}") from exc
        if not isinstance(self._table, dict):
            raise BackendError(f"fixture {self.path} must be a JSON object")

    def complete(self, prompt: str) -> str:
        key = prompt_hash(prompt)
        if key not in self._table:
            raise BackendError(
                f"fixture {self.path} has no completion for prompt hash {key}\n"
                f"--- prompt ---\n{prompt}"
            )
        return self._table[key]


class HttpBackend:
    """POSTs ``{"prompt": ...}`` to an endpoint returning ``{"completion": ...}``.

    The bearer token comes from the constructor or the ``VSEARCH_NL_TOKEN``
    environment variable.
    """

    def __init__(self, url: str, token: str | None = None, timeout: float = 60.0):
        self.url = url
        self.token = token if token is not None else os.environ.get(TOKEN_ENV_VAR)
        self.timeout = timeout

    def complete(self, prompt: str) -> str:
        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        try:
            resp = requests.post(self.url, json={"prompt": prompt},
                                 headers=headers, timeout=self.timeout)
            resp.raise_for_status()
            body = resp.json()
        except requests.RequestException as exc:
            raise BackendError(f"backend request to {self.url} failed: {exc}") from exc
        except ValueError as exc:
            raise BackendError(f"backend at {self.url} returned non-JSON body") from exc
        if not isinstance(body, dict) or "completion" not in body:
            raise BackendError(f"backend at {self.url} returned no 'completion' field")
        return str(body["completion"])


def backend_from_spec(spec: str) -> NlBackend:
    """Build a backend from a CLI-style spec: ``fixture:PATH`` or ``http:URL``."""
    kind, sep, rest = spec.partition(":")
    if not sep or not rest:
        raise InputFormatError(f"bad backend spec {spec!r}: expected fixture:PATH or http:URL")
    if kind == "fixture":
        return FixtureBackend(rest)
    if kind == "http":
        return HttpBackend(rest)
    raise InputFormatError(f"unknown backend kind {kind!r}: expected fixture or http")


# ---------------------------------------------------------------------------
# Prompts and completion parsing
# ---------------------------------------------------------------------------


def _numbered(rules: Iterable[str]) -> str:
    return "\n".join(f"{i}. {rule}" for i, rule in enumerate(rules, start=1))


def noun_phrase_prompt(rules: RuleSet) -> str:
    return "Extract noun phrases from the following rules:\n" + _numbered(rules.rules)


def translation_prompt(rules: RuleSet, props: Iterable[str]) -> str:
    return (
        "Define the following rules in temporal logic with atomic propositions "
        + ", ".join(props)
        + ":\n"
        + _numbered(rules.rules)
    )


_NUMBERED_LINE_RE = re.compile(r"\s*\d+\s*[.)]\s*(.*\S)\s*$")


def parse_numbered_list(completion: str) -> list[str]:
    """Parse a completion of the form ``1. item`` per line.

    Blank lines are ignored; any other non-conforming line makes the whole
    completion an error (the raw text is attached for inspection).
    """
    items: list[str] = []
    for line in completion.splitlines():
        if not line.strip():
            continue
        m = _NUMBERED_LINE_RE.match(line)
        if not m:
            raise UnparseableCompletionError(
                f"line {line!r} is not a numbered list item", completion
            )
        items.append(m.group(1))
    if not items:
        raise UnparseableCompletionError("completion contains no list items", completion)
    return items


def extract_noun_phrases(rules: RuleSet, backend: NlBackend) -> list[str]:
    """Stage one: query for the noun phrases named by the rules.

    Returns the phrases in completion order, deduplicated.
    """
    completion = backend.complete(noun_phrase_prompt(rules))
    phrases = parse_numbered_list(completion)
    seen: set[str] = set()
    out: list[str] = []
    for phrase in phrases:
        key = phrase.strip().lower()
        if key and key not in seen:
            seen.add(key)
            out.append(phrase.strip())
    return out


def normalize_proposition(phrase: str) -> Proposition:
    """Normalize a noun phrase into a proposition identifier.

    Lowercases, maps whitespace and hyphens to underscores, and drops any
    other non-alphanumeric characters. Idempotent.
    """
    s = phrase.strip().lower()
    s = re.sub(r"[\s\-]+", "_", s)
    s = re.sub(r"[^a-z0-9_]", "", s)
    s = re.sub(r"_+", "_", s).strip("_")
    s = s.lstrip("0123456789_")
    if not s:
        raise InvalidPropositionError(f"phrase {phrase!r} is empty after normalization")
    return Proposition(s)


_UNICODE_OPS = {
    "□": " G ",   # white square, always
    "◇": " F ",   # white diamond, eventually
    "◊": " F ",   # lozenge
    "○": " X ",   # white circle, next
    "◯": " X ",   # large circle
    "∧": " & ",
    "∨": " | ",
    "¬": " ! ",
    "→": " -> ",
    "↔": " <-> ",
    "⊕": " ^ ",
}


def normalize_formula_text(text: str, phrase_to_prop: dict[str, str]) -> str:
    """Rewrite one completion line into grammar tokens: unicode operators to
    ASCII and multiword phrases to their normalized identifiers."""
    out = text
    # Longest phrases first so that "green light" wins over "light".
    for phrase in sorted(phrase_to_prop, key=len, reverse=True):
        pattern = re.compile(r"\b" + re.escape(phrase) + r"\b", re.IGNORECASE)
        out = pattern.sub(phrase_to_prop[phrase], out)
    for ch, repl in _UNICODE_OPS.items():
        out = out.replace(ch, repl)
    return out.strip()


def rules_to_ltlf(rules: RuleSet, props: Iterable[str], backend: NlBackend) -> SpecSet:
    """Stage two: translate every rule into a formula over ``props``.

    ``props`` are natural phrases; they are normalized into identifiers and
    the completion lines are rewritten accordingly before parsing. Formula
    ids are ``phi1``, ``phi2``, ... in rule order.
    """
    phrases = list(props)
    if not phrases:
        raise InputFormatError("no propositions given for translation")
    phrase_to_prop = {phrase: normalize_proposition(phrase).name for phrase in phrases}
    declared = frozenset(Proposition(name) for name in phrase_to_prop.values())

    completion = backend.complete(translation_prompt(rules, phrases))
    lines = parse_numbered_list(completion)
    if len(lines) != len(rules.rules):
        raise UnparseableCompletionError(
            f"expected {len(rules.rules)} formulas, completion has {len(lines)}", completion
        )

    formulas: list[tuple[str, Formula, int]] = []
    failures: list[tuple[int, str]] = []
    for i, line in enumerate(lines):
        normalized = normalize_formula_text(line, phrase_to_prop)
        try:
            formulas.append((f"phi{i + 1}", ltlf.parse_formula(normalized, declared), i))
        except VsearchError as exc:
            failures.append((i + 1, f"{exc} (normalized text: {normalized!r})"))
    if failures:
        raise TranslationError(failures, total=len(lines))
    return SpecSet(propositions=declared, formulas=tuple(formulas))


# ---------------------------------------------------------------------------
# Spec file format
# ---------------------------------------------------------------------------


def spec_to_dict(spec: SpecSet) -> dict:
    return {
        "propositions": sorted(p.name for p in spec.propositions),
        "formulas": [
            {"id": fid, "ltlf": ltlf.format_formula(f)} for fid, f, _ in spec.formulas
        ],
    }


def spec_from_dict(data: dict) -> SpecSet:
    try:
        prop_names = [str(p) for p in data["propositions"]]
        raw = [(str(f["id"]), str(f["ltlf"])) for f in data["formulas"]]
    except (KeyError, TypeError) as exc:
        raise InputFormatError(f"malformed spec data: {exc}") from exc
    declared = frozenset(Proposition(name) for name in prop_names)
    formulas = tuple(
        (fid, ltlf.parse_formula(text, declared), i) for i, (fid, text) in enumerate(raw)
    )
    ids = [fid for fid, _, _ in formulas]
    if len(set(ids)) != len(ids):
        raise InputFormatError("duplicate formula ids in spec")
    return SpecSet(propositions=declared, formulas=formulas)


def save_spec(spec: SpecSet, path: str | Path) -> None:
    Path(path).write_text(json.dumps(spec_to_dict(spec), indent=2) + "\n", encoding="utf-8")


def load_spec(path: str | Path) -> SpecSet:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"{path}: not valid JSON: {exc}") from exc
    return spec_from_dict(data)
