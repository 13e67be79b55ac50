"""
Exception hierarchy for rou-lab.

Two families, mirroring how the command line reports failures:
  - ValidationError  → bad input (exit code 1)
  - EstimationError  → numerical / estimator failure at runtime (exit code 2)
"""


class RouLabError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 2


# ─── validation (exit 1) ──────────────────────────────────────────────────


class ValidationError(RouLabError, ValueError):
    exit_code = 1


class DomainError(ValidationError):
    """Argument outside the domain of a kernel or model formula."""


class UnsupportedBasisError(ValidationError):
    """Basis element outside the trigonometric family."""


class LengthMismatchError(ValidationError):
    """Grid function and path have different lengths."""


class ResolutionMismatchError(ValidationError):
    """Kernel constants were calibrated on a different lattice."""


class SizeLimitError(ValidationError):
    """Brute-force computation requested above its cost guard."""


class OutputExistsError(ValidationError):
    """Refusing to overwrite an existing artifact without --force."""


# ─── estimation / runtime (exit 2) ────────────────────────────────────────


class EstimationError(RouLabError):
    exit_code = 2


class CalibrationError(EstimationError):
    """Kernel constant calibration produced a non-finite or non-positive scale."""


class DegeneratePathError(EstimationError):
    """gamma_n^{-1} <= 0: the observed path carries no information on alpha."""


class SingularMatrixError(EstimationError):
    """Q_n cannot be inverted."""


class NearZeroDenominatorError(EstimationError):
    """The (A1) denominator (1/n) * int phi_{p+1} X dt is numerically zero."""


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the process exit code used by the CLI."""
    if isinstance(exc, RouLabError):
        return exc.exit_code
    return 2
