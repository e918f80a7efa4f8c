"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A model or operation parameter is missing or out of range."""


class DomainError(ValueError):
    """A coordinate lies at or outside the allowed open interval."""


class QuadratureFailureError(RuntimeError):
    """Adaptive quadrature could not reach the requested accuracy.

    Carries the partial estimate in ``partial``.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ZetaCrossingError(RuntimeError):
    """zeta_2(x) = E + m v_F^2 changes sign inside the domain.

    The component reduction divides by zeta_2, so the requested energy is
    inadmissible; the caller must restrict E.
    """


class ApproximationInvalidError(ValueError):
    """The energy-independent effective potential needs m(x) > 0."""


class SingularNodeError(RuntimeError):
    """A grid node carries a non-finite value where a finite one is required."""


class NonConvergenceError(RuntimeError):
    """An iteration exceeded its budget. Carries the iterate ``history``."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class InsufficientResolutionError(ValueError):
    """More eigenstates were requested than the grid can resolve."""


class ImaginaryEnergyError(ValueError):
    """lambda + offset < 0: the energy would be imaginary (unphysical regime)."""


class NonNormalizableError(RuntimeError):
    """The state's total probability is divergent or zero."""


class SubGapError(ValueError):
    """Requested energy satisfies E^2 < A^2, below the constant-u gap."""


class ConfigError(ValueError):
    """A run configuration failed to parse or validate."""


class AsPublishedWarning(UserWarning):
    """Emitted when a value comes from a formula flagged as-published."""
