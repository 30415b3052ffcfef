"""Exact finite-space probability metrics and generalization bounds for learning algorithms."""

from .config import DEFAULT_SETTINGS, Settings
from .errors import (
    DimensionMismatch,
    EnumerationCapExceeded,
    GenlabError,
    InvalidDistribution,
    MetricViolation,
    NonpositiveBound,
    NoPath,
    ParseError,
    SolverFailure,
    SpaceTooLarge,
    ZeroDistance,
)
from .space import (
    Coupling,
    Distribution,
    FiniteMetricSpace,
    FiniteSet,
    JointDistribution,
    build_space,
    discrete_space,
    line_space,
    uniform,
)

__version__ = "0.1.0"

__all__ = [
    "Coupling",
    "DEFAULT_SETTINGS",
    "DimensionMismatch",
    "Distribution",
    "EnumerationCapExceeded",
    "FiniteMetricSpace",
    "FiniteSet",
    "GenlabError",
    "InvalidDistribution",
    "JointDistribution",
    "MetricViolation",
    "NoPath",
    "NonpositiveBound",
    "ParseError",
    "Settings",
    "SolverFailure",
    "SpaceTooLarge",
    "ZeroDistance",
    "build_space",
    "discrete_space",
    "line_space",
    "uniform",
]
