"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 malformed input, 3 a resource cap
was exceeded during verification.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import __version__
from .automaton import frames_to_automaton, load_automaton, load_trace, save_automaton
from .calibration import fit_model, load_model, load_samples, save_model
from .checker import check_probability, enumerate_probability
from .errors import BackendError, InputFormatError, ResourceLimitError
from .metrics import GroundTruth, emit_report, metrics_table
from .nl2spec import RuleSet, backend_from_spec, extract_noun_phrases, load_spec, rules_to_ltlf, save_spec, spec_to_dict
from .pipeline import SearchResult, search

RESULT_COLUMNS = ["video_id", "formula_id", "probability", "included"]


def cmd_calibrate(args) -> int:
    samples = load_samples(args.samples)
    model = fit_model(samples, bin_width=args.bin_width)
    save_model(model, args.output)
    print(f"fitted k={model.k:.6g} x0={model.x0:.6g} "
          f"t_false={model.t_false:.6g} t_true={model.t_true:.6g} -> {args.output}")
    return 0


def cmd_automaton(args) -> int:
    trace = load_trace(args.trace)
    model = load_model(args.calib)
    aut = frames_to_automaton(trace, model)
    save_automaton(aut, args.output)
    print(f"{trace.video_id}: {len(aut.states)} states, "
          f"{len(aut.transitions)} transitions -> {args.output}")
    return 0


def cmd_check(args) -> int:
    aut = load_automaton(args.automaton)
    spec = load_spec(args.spec)
    checker = enumerate_probability if args.oracle else check_probability
    for fid, formula, _ in spec.formulas:
        result = checker(aut, formula, formula_id=fid)
        print(f"{fid}\t{result.probability!r}")
    return 0


def cmd_search(args) -> int:
    traces_dir = Path(args.traces)
    paths = sorted(traces_dir.glob("*.json"))
    if not paths:
        raise InputFormatError(f"no trace files (*.json) under {traces_dir}")
    spec = load_spec(args.spec)
    model = load_model(args.calib)

    failures: list[str] = []

    def note_failure(video_id: str, exc: Exception) -> None:
        failures.append(video_id)
        print(f"warning: skipping {video_id}: {exc}", file=sys.stderr)

    results = search(
        (load_trace(p) for p in paths),
        spec,
        model,
        threshold=args.threshold,
        chunk_len=args.chunk_len,
        on_error=note_failure,
    )
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for r in results:
            for fid in sorted(r.probabilities):
                writer.writerow([
                    r.video_id, fid, repr(r.probabilities[fid]),
                    "true" if r.included else "false",
                ])
    included = sum(1 for r in results if r.included)
    print(f"{included}/{len(results)} videos included (threshold {args.threshold})"
          + (f", {len(failures)} failed" if failures else ""))
    return 0


def _read_results_csv(path: str) -> list[SearchResult]:
    probs: dict[str, dict[str, float]] = {}
    included: dict[str, bool] = {}
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != RESULT_COLUMNS:
                raise InputFormatError(
                    f"{path}: expected columns {','.join(RESULT_COLUMNS)}"
                )
            for row in reader:
                vid = row["video_id"]
                probs.setdefault(vid, {})[row["formula_id"]] = float(row["probability"])
                included[vid] = row["included"] == "true"
    except (KeyError, TypeError, ValueError) as exc:
        raise InputFormatError(f"{path}: malformed results CSV: {exc}") from exc
    return [
        SearchResult(video_id=vid, probabilities=probs[vid],
                     included=included[vid], threshold=0.5)
        for vid in sorted(probs)
    ]


def cmd_metrics(args) -> int:
    results = _read_results_csv(args.results)
    gt = GroundTruth.from_file(args.ground_truth)
    formula_ids = sorted({fid for r in results for fid in r.probabilities})
    rows = metrics_table(results, gt, formula_ids, n_intervals=args.intervals)
    emit_report(rows, args.output)
    print(f"{len(rows)} metric rows -> {args.output}")
    return 0


def cmd_nl2ltl(args) -> int:
    rules = RuleSet.from_file(args.rules)
    backend = backend_from_spec(args.backend)
    if args.props:
        props = [p.strip() for p in args.props.split(",") if p.strip()]
    else:
        props = extract_noun_phrases(rules, backend)
        print(f"extracted propositions: {', '.join(props)}", file=sys.stderr)
    spec = rules_to_ltlf(rules, props, backend)
    if args.output:
        save_spec(spec, args.output)
        print(f"{len(spec.formulas)} formulas -> {args.output}")
    else:
        import json

        print(json.dumps(spec_to_dict(spec), indent=2))
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vsearch",
                     description="Search video detection traces for events "
                                 "described in finite-trace temporal logic.")
    parser.add_argument("--version", action="version", version=f"vsearch {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("calibrate", help="fit a calibration model from labelled samples")
    p.add_argument("--samples", required=True, help="JSON array of {confidence, correct}")
    p.add_argument("--bin-width", type=float, default=0.02)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("automaton", help="build the probabilistic automaton for one trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--calib", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_automaton)

    p = sub.add_parser("check", help="probability that an automaton satisfies each formula")
    p.add_argument("--automaton", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--oracle", action="store_true",
                   help="use explicit trajectory enumeration instead of the product DP")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("search", help="verify a directory of traces and write results CSV")
    p.add_argument("--traces", required=True, help="directory of trace JSON files")
    p.add_argument("--spec", required=True)
    p.add_argument("--calib", required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--chunk-len", type=int, default=None,
                   help="split each trace into chunks of this many frames")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("metrics", help="interval precision/recall/accuracy against ground truth")
    p.add_argument("--results", required=True, help="results CSV from the search command")
    p.add_argument("--ground-truth", required=True)
    p.add_argument("--intervals", type=int, default=20)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("nl2ltl", help="turn natural-language rules into a spec file")
    p.add_argument("--rules", required=True, help="text file, one rule per line")
    p.add_argument("--props", default=None,
                   help="comma-separated propositions; extracted from the rules when omitted")
    p.add_argument("--backend", required=True, help="fixture:PATH or http:URL")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_nl2ltl)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (InputFormatError, BackendError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
