"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class FireflyBeamError(Exception):
    """Base class for all package errors."""


class ContractViolation(FireflyBeamError, ValueError):
    """An argument breaks a documented precondition (shape, sign, symmetry)."""


class NumericError(FireflyBeamError, ArithmeticError):
    """A computation produced or received non-finite values."""


class IterationLimitError(NumericError):
    """An iterative routine ran out of iterations before meeting its tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


class SingularityError(NumericError):
    """A matrix expected to be Hermitian positive definite is not."""


class DegenerateChannelError(NumericError):
    """A user's channel is orthogonal to its beamforming direction."""


class InfeasibleError(FireflyBeamError):
    """A power-recovery or repair step has no feasible (positive) solution."""


class EvaluationError(NumericError):
    """An objective or constraint evaluator failed inside a firefly run."""

    def __init__(self, message: str, generation: int):
        super().__init__(f"generation {generation}: {message}")
        self.generation = generation


class ConfigError(FireflyBeamError, ValueError):
    """A scenario or experiment configuration is incomplete or inconsistent."""

    def __init__(self, message: str, missing: tuple[str, ...] = ()):
        if missing:
            message = f"{message}; missing: {', '.join(missing)}"
        super().__init__(message)
        self.missing = missing
