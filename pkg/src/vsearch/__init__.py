"""Search video collections for events described in finite-trace temporal
logic, with calibrated probabilistic guarantees.

The pieces compose left to right: detector confidences are calibrated into
probabilities (:mod:`vsearch.calibration`), each video's detection trace is
compiled into a layered probabilistic automaton
(:mod:`vsearch.automaton`), formulas over the frame propositions
(:mod:`vsearch.ltlf`) are checked exactly against that automaton
(:mod:`vsearch.checker`), and a search pipeline applies the inclusion
threshold across a collection (:mod:`vsearch.pipeline`,
:mod:`vsearch.metrics`). Natural-language rules become formulas through
:mod:`vsearch.nl2spec`.
"""

__version__ = "0.1.0"

from .automaton import (
    DetectionTrace,
    Frame,
    ProbabilisticAutomaton,
    State,
    Transition,
    deserialize,
    frames_to_automaton,
    load_automaton,
    load_trace,
    save_automaton,
    save_trace,
    serialize,
    validate,
)
from .calibration import (
    CalibrationModel,
    CalibrationSample,
    ReliabilityBin,
    bin_samples,
    derive_thresholds,
    fit_logistic,
    fit_model,
    invert_mapping,
    load_model,
    map_confidence,
    map_thresholded,
    save_model,
)
from .checker import CheckResult, check_probability, enumerate_probability
from .ltlf import (
    FALSE,
    TRUE,
    Formula,
    Proposition,
    SpecDfa,
    atom,
    evaluate_trace,
    extract_propositions,
    format_formula,
    parse_formula,
    progress,
    to_dfa,
    weak_next,
)
from .metrics import (
    GroundTruth,
    IntervalAccuracy,
    IntervalMetrics,
    MetricsRow,
    emit_report,
    interval_metrics,
    metrics_table,
    search_accuracy,
)
from .nl2spec import (
    FixtureBackend,
    HttpBackend,
    RuleSet,
    SpecSet,
    backend_from_spec,
    extract_noun_phrases,
    load_spec,
    normalize_proposition,
    rules_to_ltlf,
    save_spec,
)
from .pipeline import SearchResult, chunk_trace, search, verify_video
