"""Exact satisfaction probabilities for layered automata.

:func:`check_probability` runs a dynamic program over the product of the
automaton's layers with the formula's DFA, in O(transitions x DFA states).
:func:`enumerate_probability` walks every trajectory explicitly and serves
as the independent oracle for the product construction.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import ltlf
from .automaton import ProbabilisticAutomaton
from .errors import EnumerationCapError, UndeclaredAtomError
from .ltlf import Formula, evaluate_trace, to_dfa

DEFAULT_PATH_CAP = 10**6


RANGE_TOL = 1e-12


@dataclass(frozen=True)
class CheckResult:
    probability: float
    formula_id: str = ""
    trajectory_count_checked: int | None = None
    method: str = "product_dp"

    def __post_init__(self):
        if not -RANGE_TOL <= self.probability <= 1.0 + RANGE_TOL:
            raise ValueError(f"probability {self.probability} outside [0, 1]")


def _automaton_props(a: ProbabilisticAutomaton) -> set[str]:
    props: set[str] = set()
    for s in a.states:
        if s.label is not None:
            props.update(s.label)
    return props


def _check_atoms(a: ProbabilisticAutomaton, f: Formula) -> None:
    available = _automaton_props(a)
    for p in ltlf.extract_propositions(f):
        if p.name not in available:
            raise UndeclaredAtomError(p.name)


def check_probability(
    a: ProbabilisticAutomaton,
    f: Formula,
    formula_id: str = "",
    max_dfa_states: int = 4096,
) -> CheckResult:
    """Total probability mass of trajectories whose label sequence satisfies
    ``f``, computed without enumerating paths.

    The automaton's state labels are projected onto the formula's atoms and
    fed through the formula's DFA while probability mass flows layer by
    layer. The initial state's empty label is not part of the trajectory.
    """
    _check_atoms(a, f)
    atoms = sorted(p.name for p in ltlf.extract_propositions(f))
    dfa = to_dfa(f, atoms, max_states=max_dfa_states)
    atom_set = frozenset(atoms)

    # Per-state DFA symbol and a dense transition table for the hot loop.
    symbol_of = {
        s.id: frozenset(k for k, v in s.label.items() if v) & atom_set
        for s in a.states
        if s.label is not None
    }
    layers = sorted({s.layer for s in a.states})
    by_layer: dict[int, list] = {layer: [] for layer in layers}
    for t in a.transitions:
        by_layer[a.state_by_id(t.src).layer].append(t)

    dist: dict[tuple[int, int], float] = {(a.initial, dfa.initial): 1.0}
    for layer in layers[:-1]:
        by_src: dict[int, dict[int, float]] = {}
        for (sid, q), mass in dist.items():
            by_src.setdefault(sid, {})[q] = mass
        nxt: dict[tuple[int, int], float] = {}
        for t in by_layer[layer]:
            qmap = by_src.get(t.src)
            if not qmap:
                continue
            sym = symbol_of[t.dst]
            for q, mass in qmap.items():
                key = (t.dst, dfa.transitions[(q, sym)])
                nxt[key] = nxt.get(key, 0.0) + mass * t.probability
        dist = nxt

    prob = sum(
        mass for (sid, q), mass in dist.items()
        if sid in a.accepting and q in dfa.accepting
    )
    return CheckResult(probability=prob, formula_id=formula_id, method="product_dp")


def enumerate_probability(
    a: ProbabilisticAutomaton,
    f: Formula,
    formula_id: str = "",
    max_paths: int = DEFAULT_PATH_CAP,
) -> CheckResult:
    """Oracle: explicitly enumerate every trajectory, evaluate the formula
    on its label sequence, and sum the probabilities of the satisfying ones.

    Raises :class:`EnumerationCapError` past ``max_paths`` trajectories; use
    :func:`check_probability` for large automata.
    """
    _check_atoms(a, f)
    succ: dict[int, list] = {s.id: [] for s in a.states}
    for t in a.transitions:
        succ[t.src].append(t)
    symbol_of = {
        s.id: frozenset(k for k, v in s.label.items() if v)
        for s in a.states
        if s.label is not None
    }

    total = 0.0
    count = 0
    stack: list[tuple[int, float, list[frozenset[str]]]] = [(a.initial, 1.0, [])]
    while stack:
        sid, mass, trace = stack.pop()
        if not succ[sid]:
            if sid not in a.accepting:
                continue
            count += 1
            if count > max_paths:
                raise EnumerationCapError(
                    f"more than {max_paths} trajectories; use check_probability instead"
                )
            if evaluate_trace(f, trace):
                total += mass
            continue
        for t in succ[sid]:
            stack.append((t.dst, mass * t.probability, trace + [symbol_of[t.dst]]))

    return CheckResult(
        probability=total,
        formula_id=formula_id,
        trajectory_count_checked=count,
        method="enumeration",
    )
