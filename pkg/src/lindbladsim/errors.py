"""Exception types shared across the package."""


class LindbladSimError(Exception):
    """Base class for every error raised by this package."""


class ModelError(LindbladSimError, ValueError):
    """Invalid physical model: non-Hermitian Hamiltonian, bad shapes, bad bounds."""


class ArgumentError(LindbladSimError, ValueError):
    """Invalid argument to a numerical routine."""


class ResourceLimitError(LindbladSimError):
    """Requested enumeration exceeds the desk-scale guardrails."""


class InfeasiblePrecisionError(LindbladSimError):
    """No truncation orders within the search caps reach the requested precision."""


class PauliParseError(LindbladSimError, ValueError):
    """Syntax error in a Pauli-sum expression; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ContractError(LindbladSimError):
    """A primitive was invoked outside the premise its guarantee needs."""

    def __init__(self, message: str, measured: float | None = None):
        super().__init__(message)
        self.measured = measured
