"""Generalized firefly algorithm for constrained beamforming over complex matrices."""

from .errors import (
    ConfigError,
    ContractViolation,
    DegenerateChannelError,
    EvaluationError,
    FireflyBeamError,
    InfeasibleError,
    IterationLimitError,
    NumericError,
    SingularityError,
)
from .fa import FAConfig, PenaltyWeights, ProblemSpec, SolveTrace, Variable, run_fa

__all__ = [
    "ConfigError",
    "ContractViolation",
    "DegenerateChannelError",
    "EvaluationError",
    "FAConfig",
    "FireflyBeamError",
    "InfeasibleError",
    "IterationLimitError",
    "NumericError",
    "PenaltyWeights",
    "ProblemSpec",
    "SingularityError",
    "SolveTrace",
    "Variable",
    "run_fa",
]
