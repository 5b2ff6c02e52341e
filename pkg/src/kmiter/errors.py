"""Exception types shared across the package.

Everything raised on purpose derives from :class:`KmiterError`, so callers
(including the command line driver) can tell deliberate rejections from
genuine bugs.  Configuration problems and numerical failures are kept on
separate branches because they map to different process exit codes.
"""

from __future__ import annotations


class KmiterError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(KmiterError):
    """Invalid configuration, arguments, or input file contents."""


class ModelMismatchError(ConfigError):
    """Operands built over different spectrum models were combined."""


class NumericError(KmiterError):
    """A computation left the representable or admissible range."""


class EvaluationError(NumericError):
    """A spectral function produced a non-finite value.

    Attributes
    ----------
    mode_indices : tuple of int
        Zero-based positions of the offending eigenvalues.
    """

    def __init__(self, message: str, mode_indices: tuple[int, ...] = ()):
        super().__init__(message)
        self.mode_indices = tuple(int(i) for i in mode_indices)


class ModeOverflowError(NumericError):
    """A per-mode value exceeded the overflow guard (1e300) or was non-finite.

    Attributes
    ----------
    mode_indices : tuple of int
        Zero-based positions of the modes that overflowed.
    """

    def __init__(self, message: str, mode_indices: tuple[int, ...] = ()):
        super().__init__(message)
        self.mode_indices = tuple(int(i) for i in mode_indices)


class ResonanceError(NumericError):
    """A hyperbolic problem was posed too close to a resonant time.

    Raised when ``|sin(lambda_j * T)|`` falls at or below the resonance
    tolerance for some eigenvalue, which would make the Dirichlet data fail
    to determine the solution mode.
    """

    def __init__(self, message: str, mode_indices: tuple[int, ...] = ()):
        super().__init__(message)
        self.mode_indices = tuple(int(i) for i in mode_indices)


class DegenerateComplementError(NumericError):
    """A fixed point was requested where some 1 - F(lambda_j) is exactly zero.

    The affine iteration phi -> F(A) phi + z has no fixed point on modes
    where the multiplier equals one in floating point; cutoff regularization
    that drops those modes is the supported way around this.
    """

    def __init__(self, message: str, mode_indices: tuple[int, ...] = ()):
        super().__init__(message)
        self.mode_indices = tuple(int(i) for i in mode_indices)
