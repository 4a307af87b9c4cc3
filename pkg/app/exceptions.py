from typing import Optional


class InterfaceSimError(Exception):
    """Base class for every error raised by the toolkit."""


class ConfigurationError(InterfaceSimError, ValueError):
    """Invalid configuration or precondition violation."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedOrderError(InterfaceSimError, ValueError):
    """Requested derivative order beyond what the modulation functions provide."""


class InternalConsistencyError(InterfaceSimError, RuntimeError):
    """A stencil read crossed the interface without an override."""


class IllConditionedInterfaceError(InterfaceSimError, RuntimeError):
    """The plus-side jump matrix is (numerically) singular."""

    def __init__(self, message: str, condition: float):
        self.condition = condition
        super().__init__(f"{message} (condition estimate {condition:.3e})")


class FitRankError(InterfaceSimError, RuntimeError):
    """The one-sided Taylor fit around the interface is rank deficient."""

    def __init__(self, message: str, rank: int, shape: tuple):
        self.rank = rank
        self.shape = shape
        super().__init__(f"{message} (rank {rank} for system of shape {shape})")


class NumericalFailureError(InterfaceSimError, RuntimeError):
    """Singular linear system or non-finite field values."""


class SingularComplianceError(InterfaceSimError, RuntimeError):
    """The compliance (or inertia) reached a nonpositive value inside an ODE integration."""

    def __init__(self, t: float, value: float):
        self.t = t
        self.value = value
        super().__init__(f"nonpositive interface parameter {value:.6e} at t = {t:.6e} s")


class CheckFailedError(InterfaceSimError):
    """A scenario's built-in check did not pass."""

    def __init__(self, name: str, value: float, threshold: str):
        self.name = name
        self.value = value
        self.threshold = threshold
        super().__init__(f"check '{name}' failed: value {value!r}, expected {threshold}")
