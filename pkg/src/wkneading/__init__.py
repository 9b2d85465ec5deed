"""Weighted kneading theory for piecewise monotone interval maps."""

from .series import SeriesMatrix, TruncatedSeries
from .system import (
    EXACT,
    FLOAT,
    Branch,
    Germ,
    GermAmbiguityError,
    GermInterval,
    ValidationError,
    WeightedSystem,
    closed_interval,
    minus,
    open_interval,
    plus,
    singleton,
    validate_system,
)

__version__ = "0.1.0"

__all__ = [
    "EXACT",
    "FLOAT",
    "Branch",
    "Germ",
    "GermAmbiguityError",
    "GermInterval",
    "SeriesMatrix",
    "TruncatedSeries",
    "ValidationError",
    "WeightedSystem",
    "closed_interval",
    "minus",
    "open_interval",
    "plus",
    "singleton",
    "validate_system",
]
