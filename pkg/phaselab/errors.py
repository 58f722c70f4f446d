"""
Error hierarchy and exit-code mapping for phaselab.

Preconditions that a caller violated raise ParameterError subclasses;
failures discovered while computing raise NumericError subclasses.
ErrorReporter turns either kind (and pydantic ValidationErrors) into a
CLI exit code plus levelled log lines.
"""
import logging
from typing import Iterable, List

from pydantic import ValidationError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERIC = 3


class PhaselabError(Exception):
    """Base class for every error raised by phaselab."""


class ConfigurationError(PhaselabError):
    """Config file missing, unparsable, or failing validation."""

    def __init__(self, message: str, diagnostics: Iterable[str] = ()):
        super().__init__(message)
        self.diagnostics: List[str] = list(diagnostics)


class IncompleteRunError(ConfigurationError):
    """Run directory has no manifest or its outputs fail checksum."""


class ParameterError(PhaselabError, ValueError):
    """An operation was called outside its precondition."""


class ResolutionError(ParameterError):
    """Feature narrower than the grid can resolve."""


class AliasingError(ParameterError):
    """Wavenumber at or beyond the grid Nyquist limit."""


class DimensionError(ParameterError):
    """Array length does not match the grid."""


class PreparationError(ParameterError):
    """Initial state geometry violates its preparation rules."""


class NumericError(PhaselabError, ArithmeticError):
    """Computation produced an unusable result."""


class DegenerateStateError(NumericError):
    """Zero-norm field where a normalizable state is required."""


class UnwrapError(NumericError):
    """Phase jump between adjacent valid samples is unresolvable."""


class NodeError(NumericError):
    """Direct Madelung integration requested on a state with (near-)nodes."""


class InstabilityError(NumericError):
    """Integrator blew up or drifted beyond its norm tolerance."""


class EscapeError(NumericError):
    """Trajectory left the usable interior of the grid."""


class InsufficientDataError(NumericError):
    """Too few snapshots for the requested finite difference."""


class SpacingError(NumericError):
    """Snapshot times are not uniformly spaced."""


class NoFringeError(NumericError):
    """Intensity shows no fringe peak above background."""


def format_validation_error(error: ValidationError) -> List[str]:
    """Flatten a pydantic ValidationError to `dotted.loc: message` lines."""
    lines = []
    for item in error.errors():
        loc = ".".join(str(part) for part in item.get("loc", ()))
        message = item.get("msg", "invalid value")
        lines.append(f"{loc}: {message}" if loc else message)
    return lines


class ErrorReporter:
    """
    Map exceptions to exit codes and log them once.

    Invalid input (config, run directory) -> 2; anything raised by the
    physics while a validated run executes -> 3.
    """

    def __init__(self, debug_mode: bool = False):
        self.debug_mode = debug_mode

    def exit_code_for(self, error: BaseException) -> int:
        if isinstance(error, (ConfigurationError, ValidationError)):
            return EXIT_INVALID
        return EXIT_NUMERIC

    def diagnostics_for(self, error: BaseException) -> List[str]:
        if isinstance(error, ValidationError):
            return format_validation_error(error)
        if isinstance(error, ConfigurationError) and error.diagnostics:
            return list(error.diagnostics)
        return [f"{type(error).__name__}: {error}"]

    def report(self, error: BaseException, context: str = "") -> int:
        code = self.exit_code_for(error)
        prefix = f"{context}: " if context else ""
        for line in self.diagnostics_for(error):
            if code == EXIT_INVALID:
                logger.warning(f"{prefix}{line}")
            else:
                logger.error(f"{prefix}{line}")
        if self.debug_mode and code == EXIT_NUMERIC:
            logger.debug("Traceback for numeric failure", exc_info=error)
        return code
