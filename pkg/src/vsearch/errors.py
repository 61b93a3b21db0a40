"""Exception hierarchy shared across the package.

Two broad families matter to callers: :class:`InputFormatError` covers
anything wrong with user-supplied data (bad syntax, bad schema, values out
of range) and maps to CLI exit code 2, while :class:`ResourceLimitError`
covers configurable caps that were exceeded and maps to exit code 3.
"""

from __future__ import annotations


class VsearchError(Exception):
    """Base class for all errors raised by this package."""


class InputFormatError(VsearchError):
    """Malformed or out-of-contract input (CLI exit code 2)."""


class ResourceLimitError(VsearchError):
    """A configurable resource cap was exceeded (CLI exit code 3)."""


class LtlfSyntaxError(InputFormatError):
    """Formula text does not conform to the grammar."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UndeclaredAtomError(InputFormatError):
    """A formula references an atom outside the declared proposition set."""

    def __init__(self, atom: str):
        super().__init__(f"undeclared atomic proposition: {atom!r}")
        self.atom = atom


class InvalidPropositionError(InputFormatError):
    """A proposition name is empty or not a valid identifier."""


class EmptyTraceError(InputFormatError):
    """Evaluation or construction was attempted on an empty trace."""


class DfaSizeError(ResourceLimitError):
    """Automaton compilation exceeded the configured state cap."""


class EnumerationCapError(ResourceLimitError):
    """Trajectory enumeration exceeded the configured path cap."""


class CalibrationError(InputFormatError):
    """Calibration input rejected (empty samples, bad bin width, ...)."""


class DegenerateDataError(CalibrationError):
    """Reliability bins carry no usable signal for curve fitting."""


class ConfidenceDomainError(CalibrationError):
    """A confidence score falls outside [0, 1]."""


class MalformedTraceError(InputFormatError):
    """A detection-trace file violates its schema."""


class MalformedAutomatonError(InputFormatError):
    """An automaton file violates its schema."""


class PropositionMismatchError(InputFormatError):
    """Requested propositions are not covered by the detection trace."""


class BackendError(VsearchError):
    """The text-generation backend could not be reached or answered badly."""


class UnparseableCompletionError(BackendError):
    """A completion could not be parsed as a numbered list."""

    def __init__(self, message: str, completion: str):
        super().__init__(f"{message}\n--- raw completion ---\n{completion}")
        self.completion = completion


class TranslationError(InputFormatError):
    """One or more completion lines failed to parse into formulas."""

    def __init__(self, line_errors: list[tuple[int, str]], total: int):
        self.line_errors = line_errors
        detail = "; ".join(f"rule {i}: {msg}" for i, msg in line_errors)
        prefix = "all lines failed" if len(line_errors) == total else "some lines failed"
        super().__init__(f"{prefix}: {detail}")


class MissingAnnotationError(InputFormatError):
    """Ground truth does not cover every scored video."""

    def __init__(self, video_ids: list[str]):
        self.video_ids = list(video_ids)
        super().__init__(f"missing ground-truth annotations for: {', '.join(self.video_ids)}")
