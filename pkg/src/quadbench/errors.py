"""Exception types shared across the package."""


class QuadbenchError(Exception):
    """Base class for all package errors."""


class InvalidStateError(QuadbenchError):
    """A state or input vector failed validation (non-finite, bad shape, ...)."""


class IntegrationBlowupError(QuadbenchError):
    """The integrator produced a non-finite or runaway state.

    Carries the simulation time at which the blowup was detected.
    """

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} (t={time:.6f} s)")
        self.time = time


class ConfigError(QuadbenchError):
    """A configuration file or config object is invalid."""


class PlanExhaustedError(QuadbenchError):
    """A receding-horizon plan was queried past its final knot."""


class TrainingDivergenceError(QuadbenchError):
    """PPO produced non-finite losses, ratios, or gradients."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class CorruptedParametersError(QuadbenchError):
    """Policy parameters contain non-finite values."""


class ProtocolError(QuadbenchError):
    """A benchmark protocol precondition was violated."""


class DegenerateWindowError(QuadbenchError):
    """A metric was asked to reduce an empty time window."""


class ImmobileEpisodeError(QuadbenchError):
    """Cost of transport is undefined: the episode covered no distance."""


class ProtocolMismatchError(QuadbenchError):
    """Two log sets were produced under different protocol metadata."""


class SchemaError(QuadbenchError):
    """A persisted file does not match the expected versioned format."""
