"""Finite-trace temporal logic: syntax tree, parser, evaluator, progression,
and compilation into deterministic finite automata.

A trace is a finite, non-empty sequence of steps, each step being the set of
proposition names that hold at that step. ``X`` is strong next: ``X f`` is
false at the last step. Use :func:`weak_next` for the dual reading.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import combinations
from typing import AbstractSet, Iterable, Sequence

from .errors import (
    DfaSizeError,
    EmptyTraceError,
    InvalidPropositionError,
    LtlfSyntaxError,
    UndeclaredAtomError,
)

Step = AbstractSet[str]
Trace = Sequence[Step]

_IDENT_RE = re.compile(r"[a-z][a-z0-9_]*\Z")
_RESERVED = frozenset({"true", "false"})


@dataclass(frozen=True)
class Proposition:
    """A named boolean observable, e.g. ``stop_sign``."""

    name: str

    def __post_init__(self):
        if not _IDENT_RE.match(self.name) or self.name in _RESERVED:
            raise InvalidPropositionError(
                f"invalid proposition name {self.name!r}: expected lowercase "
                "letters, digits and underscores, starting with a letter"
            )

    def __str__(self) -> str:
        return self.name


class Formula:
    """Base class for formula nodes. Instances are immutable and hashable."""

    __slots__ = ()

    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __xor__(self, other: "Formula") -> "Formula":
        return Xor(self, other)

    def __invert__(self) -> "Formula":
        return Not(self)

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class TrueFormula(Formula):
    pass


@dataclass(frozen=True)
class FalseFormula(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    prop: Proposition


@dataclass(frozen=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Xor(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    child: Formula


@dataclass(frozen=True)
class Always(Formula):
    child: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    child: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


TRUE = TrueFormula()
FALSE = FalseFormula()


def atom(name: str) -> Atom:
    """Shorthand for ``Atom(Proposition(name))``."""
    return Atom(Proposition(name))


def weak_next(f: Formula) -> Formula:
    """Weak next: true at the last step regardless of ``f``."""
    return Not(Next(Not(f)))


def extract_propositions(f: Formula) -> set[Proposition]:
    """Return exactly the atomic propositions occurring in ``f``."""
    out: set[Proposition] = set()
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, Atom):
            out.add(node.prop)
        elif isinstance(node, (Not, Next, Always, Eventually)):
            stack.append(node.child)
        elif isinstance(node, (And, Or, Xor, Implies, Iff, Until)):
            stack.append(node.left)
            stack.append(node.right)
    return out


# ---------------------------------------------------------------------------
# Formatting and parsing
# ---------------------------------------------------------------------------

_BINARY_OP = {And: "&", Or: "|", Xor: "^", Implies: "->", Iff: "<->", Until: "U"}
_UNARY_OP = {Not: "!", Next: "X", Always: "G", Eventually: "F"}


def format_formula(f: Formula) -> str:
    """Canonical, fully parenthesized text for ``f``.

    ``parse_formula(format_formula(f), ...)`` returns a structurally equal
    tree.
    """
    if isinstance(f, TrueFormula):
        return "true"
    if isinstance(f, FalseFormula):
        return "false"
    if isinstance(f, Atom):
        return f.prop.name
    cls = type(f)
    if cls in _UNARY_OP:
        return f"({_UNARY_OP[cls]} {format_formula(f.child)})"
    if cls in _BINARY_OP:
        return f"({format_formula(f.left)} {_BINARY_OP[cls]} {format_formula(f.right)})"
    raise TypeError(f"not a formula node: {f!r}")


_WORD_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")

_TEMPORAL_WORDS = {"G": Always, "F": Eventually, "X": Next}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens: list[tuple[str, str, int]] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in "()":
            tokens.append(("lparen" if c == "(" else "rparen", c, i))
            i += 1
        elif c == "!":
            tokens.append(("not", c, i))
            i += 1
        elif c == "&":
            tokens.append(("and", c, i))
            i += 1
        elif c == "|":
            tokens.append(("or", c, i))
            i += 1
        elif c == "^":
            tokens.append(("xor", c, i))
            i += 1
        elif c == "-":
            if text.startswith("->", i):
                tokens.append(("implies", "->", i))
                i += 2
            else:
                raise LtlfSyntaxError("expected '->'", i)
        elif c == "<":
            if text.startswith("<->", i):
                tokens.append(("iff", "<->", i))
                i += 3
            else:
                raise LtlfSyntaxError("expected '<->'", i)
        else:
            m = _WORD_RE.match(text, i)
            if not m:
                raise LtlfSyntaxError(f"unexpected character {c!r}", i)
            word = m.group()
            if word in ("G", "F", "X"):
                tokens.append(("temporal", word, i))
            elif word == "U":
                tokens.append(("until", word, i))
            elif word == "true":
                tokens.append(("true", word, i))
            elif word == "false":
                tokens.append(("false", word, i))
            elif _IDENT_RE.match(word):
                tokens.append(("ident", word, i))
            else:
                raise LtlfSyntaxError(f"unknown token {word!r}", i)
            i = m.end()
    tokens.append(("eof", "", n))
    return tokens


class _Parser:
    """Recursive descent over the precedence chain
    ``<-> .. -> .. | .. ^ .. & .. U .. {! G F X}`` (loose to tight)."""

    def __init__(self, tokens: list[tuple[str, str, int]], declared: frozenset[str]):
        self.tokens = tokens
        self.pos = 0
        self.declared = declared

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> tuple[str, str, int]:
        tok = self.take()
        if tok[0] != kind:
            raise LtlfSyntaxError(f"expected {kind}, found {tok[1]!r}", tok[2])
        return tok

    def parse(self) -> Formula:
        f = self.iff()
        tok = self.peek()
        if tok[0] != "eof":
            raise LtlfSyntaxError(f"unexpected trailing input {tok[1]!r}", tok[2])
        return f

    def iff(self) -> Formula:
        left = self.implies()
        while self.peek()[0] == "iff":
            self.take()
            left = Iff(left, self.implies())
        return left

    def implies(self) -> Formula:
        left = self.or_()
        if self.peek()[0] == "implies":
            self.take()
            return Implies(left, self.implies())
        return left

    def or_(self) -> Formula:
        left = self.xor()
        while self.peek()[0] == "or":
            self.take()
            left = Or(left, self.xor())
        return left

    def xor(self) -> Formula:
        left = self.and_()
        while self.peek()[0] == "xor":
            self.take()
            left = Xor(left, self.and_())
        return left

    def and_(self) -> Formula:
        left = self.until()
        while self.peek()[0] == "and":
            self.take()
            left = And(left, self.until())
        return left

    def until(self) -> Formula:
        left = self.unary()
        if self.peek()[0] == "until":
            self.take()
            return Until(left, self.until())
        return left

    def unary(self) -> Formula:
        kind, word, _ = self.peek()
        if kind == "not":
            self.take()
            return Not(self.unary())
        if kind == "temporal":
            self.take()
            return _TEMPORAL_WORDS[word](self.unary())
        return self.primary()

    def primary(self) -> Formula:
        kind, word, pos = self.take()
        if kind == "lparen":
            inner = self.iff()
            self.expect("rparen")
            return inner
        if kind == "true":
            return TRUE
        if kind == "false":
            return FALSE
        if kind == "ident":
            if word not in self.declared:
                raise UndeclaredAtomError(word)
            return Atom(Proposition(word))
        raise LtlfSyntaxError(f"expected a formula, found {word!r}", pos)


def parse_formula(text: str, props: Iterable[Proposition | str]) -> Formula:
    """Parse ``text`` into a formula over the declared propositions.

    Raises :class:`LtlfSyntaxError` on malformed input and
    :class:`UndeclaredAtomError` when an atom is not in ``props``.
    """
    declared = frozenset(p.name if isinstance(p, Proposition) else Proposition(p).name for p in props)
    return _Parser(_tokenize(text), declared).parse()


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def evaluate_trace(f: Formula, trace: Trace) -> bool:
    """Evaluate ``f`` at position 0 of a non-empty trace."""
    steps = [frozenset(step) for step in trace]
    if not steps:
        raise EmptyTraceError("cannot evaluate a formula over an empty trace")
    return _eval(f, steps, 0)


def _eval(f: Formula, steps: list[frozenset[str]], i: int) -> bool:
    if isinstance(f, TrueFormula):
        return True
    if isinstance(f, FalseFormula):
        return False
    if isinstance(f, Atom):
        return f.prop.name in steps[i]
    if isinstance(f, Not):
        return not _eval(f.child, steps, i)
    if isinstance(f, And):
        return _eval(f.left, steps, i) and _eval(f.right, steps, i)
    if isinstance(f, Or):
        return _eval(f.left, steps, i) or _eval(f.right, steps, i)
    if isinstance(f, Xor):
        return _eval(f.left, steps, i) != _eval(f.right, steps, i)
    if isinstance(f, Implies):
        return (not _eval(f.left, steps, i)) or _eval(f.right, steps, i)
    if isinstance(f, Iff):
        return _eval(f.left, steps, i) == _eval(f.right, steps, i)
    if isinstance(f, Next):
        return i + 1 < len(steps) and _eval(f.child, steps, i + 1)
    if isinstance(f, Always):
        return all(_eval(f.child, steps, j) for j in range(i, len(steps)))
    if isinstance(f, Eventually):
        return any(_eval(f.child, steps, j) for j in range(i, len(steps)))
    if isinstance(f, Until):
        for j in range(i, len(steps)):
            if _eval(f.right, steps, j):
                return True
            if not _eval(f.left, steps, j):
                return False
        return False
    raise TypeError(f"not a formula node: {f!r}")


# ---------------------------------------------------------------------------
# Progression
# ---------------------------------------------------------------------------
#
# Residuals are kept small by constant folding plus idempotence over
# flattened and/or chains; without the flattening, progression of nested
# temporal formulas would grow without bound.


def _mk_not(f: Formula) -> Formula:
    if isinstance(f, TrueFormula):
        return FALSE
    if isinstance(f, FalseFormula):
        return TRUE
    if isinstance(f, Not):
        return f.child
    return Not(f)


def _flatten(cls: type, f: Formula, out: list[Formula]) -> None:
    if isinstance(f, cls):
        _flatten(cls, f.left, out)
        _flatten(cls, f.right, out)
    else:
        out.append(f)


def _mk_nary(cls: type, absorbing: Formula, neutral: Formula, parts: Iterable[Formula]) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        _flatten(cls, p, flat)
    seen: set[Formula] = set()
    kept: list[Formula] = []
    for p in flat:
        if p == absorbing:
            return absorbing
        if p == neutral or p in seen:
            continue
        seen.add(p)
        kept.append(p)
    if not kept:
        return neutral
    kept.sort(key=format_formula)
    result = kept[-1]
    for p in reversed(kept[:-1]):
        result = cls(p, result)
    return result


def _mk_and(*parts: Formula) -> Formula:
    return _mk_nary(And, FALSE, TRUE, parts)


def _mk_or(*parts: Formula) -> Formula:
    return _mk_nary(Or, TRUE, FALSE, parts)


def _mk_xor(a: Formula, b: Formula) -> Formula:
    if a == b:
        return FALSE
    if isinstance(a, FalseFormula):
        return b
    if isinstance(b, FalseFormula):
        return a
    if isinstance(a, TrueFormula):
        return _mk_not(b)
    if isinstance(b, TrueFormula):
        return _mk_not(a)
    return Xor(a, b)


def _mk_implies(a: Formula, b: Formula) -> Formula:
    if isinstance(a, FalseFormula) or isinstance(b, TrueFormula) or a == b:
        return TRUE
    if isinstance(a, TrueFormula):
        return b
    if isinstance(b, FalseFormula):
        return _mk_not(a)
    return Implies(a, b)


def _mk_iff(a: Formula, b: Formula) -> Formula:
    if a == b:
        return TRUE
    if isinstance(a, TrueFormula):
        return b
    if isinstance(b, TrueFormula):
        return a
    if isinstance(a, FalseFormula):
        return _mk_not(b)
    if isinstance(b, FalseFormula):
        return _mk_not(a)
    return Iff(a, b)


def progress(f: Formula, step: Step, is_last: bool) -> Formula:
    """Residual obligation of ``f`` after consuming one step.

    For a non-empty remainder ``rest``, ``evaluate_trace(f, [step, *rest])``
    equals ``evaluate_trace(progress(f, step, False), rest)``. When ``step``
    is the last step, the trace satisfies ``f`` iff
    ``progress(f, step, True) == TRUE``. The residual is put into a normal
    form so that equivalent obligations are syntactically equal and repeated
    progression cannot grow without bound.
    """
    s = frozenset(step)
    return _canonical(_progress(f, s, is_last))


def _progress(f: Formula, s: frozenset[str], last: bool) -> Formula:
    if isinstance(f, (TrueFormula, FalseFormula)):
        return f
    if isinstance(f, Atom):
        return TRUE if f.prop.name in s else FALSE
    if isinstance(f, Not):
        return _mk_not(_progress(f.child, s, last))
    if isinstance(f, And):
        return _mk_and(_progress(f.left, s, last), _progress(f.right, s, last))
    if isinstance(f, Or):
        return _mk_or(_progress(f.left, s, last), _progress(f.right, s, last))
    if isinstance(f, Xor):
        return _mk_xor(_progress(f.left, s, last), _progress(f.right, s, last))
    if isinstance(f, Implies):
        return _mk_implies(_progress(f.left, s, last), _progress(f.right, s, last))
    if isinstance(f, Iff):
        return _mk_iff(_progress(f.left, s, last), _progress(f.right, s, last))
    if isinstance(f, Next):
        return FALSE if last else f.child
    if isinstance(f, Always):
        return _mk_and(_progress(f.child, s, last), TRUE if last else f)
    if isinstance(f, Eventually):
        return _mk_or(_progress(f.child, s, last), FALSE if last else f)
    if isinstance(f, Until):
        hold = _mk_and(_progress(f.left, s, last), FALSE if last else f)
        return _mk_or(_progress(f.right, s, last), hold)
    raise TypeError(f"not a formula node: {f!r}")


# A residual is, structurally, a boolean combination of "obligations": the
# atoms and temporal subformulas left to satisfy. Folding alone does not
# bound their growth (progressing xor/iff chains re-nests obligations in new
# shapes every step), so residuals are canonicalized by truth table over
# their obligations. This keeps the progression closure finite.

_CANON_MAX_OBLIGATIONS = 8


def _collect_obligations(f: Formula, out: list[Formula]) -> None:
    if isinstance(f, (TrueFormula, FalseFormula)):
        return
    if isinstance(f, (Atom, Next, Always, Eventually, Until)):
        if f not in out:
            out.append(f)
        return
    if isinstance(f, Not):
        _collect_obligations(f.child, out)
    else:
        _collect_obligations(f.left, out)
        _collect_obligations(f.right, out)


def _eval_assignment(f: Formula, assign: dict[Formula, bool]) -> bool:
    if isinstance(f, TrueFormula):
        return True
    if isinstance(f, FalseFormula):
        return False
    if isinstance(f, (Atom, Next, Always, Eventually, Until)):
        return assign[f]
    if isinstance(f, Not):
        return not _eval_assignment(f.child, assign)
    if isinstance(f, And):
        return _eval_assignment(f.left, assign) and _eval_assignment(f.right, assign)
    if isinstance(f, Or):
        return _eval_assignment(f.left, assign) or _eval_assignment(f.right, assign)
    if isinstance(f, Xor):
        return _eval_assignment(f.left, assign) != _eval_assignment(f.right, assign)
    if isinstance(f, Implies):
        return (not _eval_assignment(f.left, assign)) or _eval_assignment(f.right, assign)
    if isinstance(f, Iff):
        return _eval_assignment(f.left, assign) == _eval_assignment(f.right, assign)
    raise TypeError(f"not a formula node: {f!r}")


def _canonical(f: Formula) -> Formula:
    obligations: list[Formula] = []
    _collect_obligations(f, obligations)
    if not obligations:
        return TRUE if _eval_assignment(f, {}) else FALSE
    if len(obligations) > _CANON_MAX_OBLIGATIONS:
        return f

    variables = sorted(obligations, key=format_formula)
    # Keep only variables the truth table actually depends on.
    relevant = []
    for v in variables:
        others = [w for w in variables if w is not v]
        for mask in range(1 << len(others)):
            assign = {w: bool(mask >> i & 1) for i, w in enumerate(others)}
            assign[v] = False
            lo = _eval_assignment(f, assign)
            assign[v] = True
            if lo != _eval_assignment(f, assign):
                relevant.append(v)
                break
    if not relevant:
        return TRUE if _eval_assignment(f, {v: False for v in variables}) else FALSE

    n = len(relevant)
    minterms = []
    for mask in range(1 << n):
        assign = {v: bool(mask >> i & 1) for i, v in enumerate(relevant)}
        for v in variables:
            assign.setdefault(v, False)
        if _eval_assignment(f, assign):
            minterms.append(_mk_and(*(
                v if assign[v] else Not(v) for v in relevant
            )))
    if not minterms:
        return FALSE
    if len(minterms) == 1 << n:
        return TRUE
    return _mk_or(*minterms)


def _progress_canonical(f: Formula, s: frozenset[str], last: bool) -> Formula:
    return _canonical(_progress(f, s, last))


# ---------------------------------------------------------------------------
# DFA compilation
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpecDfa:
    """Deterministic automaton accepting exactly the traces satisfying a
    formula, over the alphabet of all subsets of ``props``.

    States are integers; the transition map is total. Acceptance over the
    empty trace is unspecified (traces have length >= 1).
    """

    props: tuple[str, ...]
    alphabet: tuple[frozenset[str], ...]
    n_states: int
    initial: int
    accepting: frozenset[int]
    transitions: dict[tuple[int, frozenset[str]], int]

    def step(self, state: int, symbol: Step) -> int:
        return self.transitions[(state, frozenset(symbol) & frozenset(self.props))]

    def accepts(self, trace: Trace) -> bool:
        steps = list(trace)
        if not steps:
            raise EmptyTraceError("cannot run a DFA over an empty trace")
        state = self.initial
        for step in steps:
            state = self.step(state, step)
        return state in self.accepting


def to_dfa(f: Formula, props: Iterable[Proposition | str], max_states: int = 4096) -> SpecDfa:
    """Compile ``f`` into a :class:`SpecDfa` over the given propositions.

    Uses progression closure with syntactic memoization; the raw machine is
    then minimized. Raises :class:`DfaSizeError` when the closure exceeds
    ``max_states``.
    """
    names = sorted(p.name if isinstance(p, Proposition) else Proposition(p).name for p in props)
    for p in extract_propositions(f):
        if p.name not in names:
            raise UndeclaredAtomError(p.name)
    alphabet = tuple(
        frozenset(combo) for r in range(len(names) + 1) for combo in combinations(names, r)
    )

    # State = (residual formula, accepted-if-trace-ended-here flag).
    start = (_canonical(f), False)
    index: dict[tuple[Formula, bool], int] = {start: 0}
    order = [start]
    rows: list[list[int]] = []
    for state in order:
        residual = state[0]
        row = []
        for sym in alphabet:
            nxt = (_progress_canonical(residual, sym, False),
                   isinstance(_progress_canonical(residual, sym, True), TrueFormula))
            if nxt not in index:
                if len(index) >= max_states:
                    raise DfaSizeError(
                        f"progression closure exceeded {max_states} states; "
                        "raise max_states to compile this formula"
                    )
                index[nxt] = len(order)
                order.append(nxt)
            row.append(index[nxt])
        rows.append(row)
    accepting = [accepted for _, accepted in order]

    return _quotient(names, alphabet, rows, accepting)


def _quotient(
    names: list[str],
    alphabet: tuple[frozenset[str], ...],
    rows: list[list[int]],
    accepting: list[bool],
) -> SpecDfa:
    n = len(rows)

    # Moore partition refinement.
    cls = [1 if a else 0 for a in accepting]
    while True:
        sigs: dict[tuple, int] = {}
        new = []
        for i in range(n):
            sig = (cls[i], tuple(cls[j] for j in rows[i]))
            new.append(sigs.setdefault(sig, len(sigs)))
        if new == cls:
            break
        cls = new

    n_cls = max(cls) + 1
    c_rows: list[list[int]] = [[] for _ in range(n_cls)]
    c_acc = [False] * n_cls
    for i in range(n):
        c_rows[cls[i]] = [cls[j] for j in rows[i]]
        c_acc[cls[i]] = accepting[i]
    init = cls[0]

    # The initial state's own acceptance flag only matters for the empty
    # trace, which is outside the language domain. If nothing transitions
    # back into it, fold it into a twin state that differs only in that flag.
    has_incoming = any(t == init for row in c_rows for t in row)
    if not has_incoming:
        for q in range(n_cls):
            if q != init and c_rows[q] == c_rows[init]:
                keep = [i for i in range(n_cls) if i != init]
                remap = {old: new for new, old in enumerate(keep)}
                c_rows = [[remap[t] for t in c_rows[i]] for i in keep]
                c_acc = [c_acc[i] for i in keep]
                n_cls -= 1
                init = remap[q]
                break

    # Renumber breadth-first from the initial state for a stable layout.
    bfs_order = [init]
    seen = {init}
    for q in bfs_order:
        for t in c_rows[q]:
            if t not in seen:
                seen.add(t)
                bfs_order.append(t)
    remap = {old: new for new, old in enumerate(bfs_order)}

    transitions = {
        (remap[q], sym): remap[c_rows[q][a]]
        for q in bfs_order
        for a, sym in enumerate(alphabet)
    }
    return SpecDfa(
        props=tuple(names),
        alphabet=alphabet,
        n_states=len(bfs_order),
        initial=0,
        accepting=frozenset(remap[q] for q in bfs_order if c_acc[q]),
        transitions=transitions,
    )
