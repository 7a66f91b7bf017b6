"""Exception types shared across the package.

Two families matter for the CLI exit-code contract: DomainError covers bad
inputs, parameters, or configuration (exit code 2); NumericalError covers
failures that arise while computing (exit code 3).
"""


class DomainError(ValueError):
    """Invalid input, parameter, or configuration."""


class ParameterDomainError(DomainError):
    """Non-finite input or out-of-domain parameter (e.g. steepness <= 0)."""


class DimensionMismatchError(DomainError):
    """Shapes or dimensions disagree."""


class UnsupportedFamilyError(DomainError):
    """Operation not defined for this dictionary family."""


class HypothesisViolationError(DomainError):
    """Evaluation point sits on (or too close to) a center, so the
    off-center hypothesis behind the limit approximations fails."""


class DataError(DomainError):
    """Non-finite or otherwise unusable data."""


class EvaluationWindowError(DomainError):
    """No admissible evaluation windows (trajectories too short)."""


class PoolError(DomainError):
    """Candidate pool unusable (empty, or smaller than requested size)."""


class ConfigError(DomainError):
    """Bad CLI/config-file values."""


class NumericalError(RuntimeError):
    """Numerical failure during an otherwise valid computation."""


class DivergenceError(NumericalError):
    """State exceeded the divergence threshold during integration."""

    def __init__(self, message, step_index=None):
        super().__init__(message)
        self.step_index = step_index


class IntegrationAccuracyError(NumericalError):
    """Quadrature failed to reach the requested accuracy."""


class TrainingDivergedError(NumericalError):
    """Training loss became non-finite."""

    def __init__(self, message, last_finite_epoch=None):
        super().__init__(message)
        self.last_finite_epoch = last_finite_epoch


class RateFitError(NumericalError):
    """Rate fit impossible (non-finite or non-positive errors)."""


class IllConditionedWarning(UserWarning):
    """Lifted data matrix is rank deficient or badly conditioned."""
