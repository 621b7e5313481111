"""Numerical laboratory for the time-dependent Schrodinger operator D_t + Delta + V."""
from .errors import (
    ChartUndefined,
    ConfigInvalid,
    DimensionMismatch,
    NoConvergence,
    NoCounterpart,
    NotCharacteristic,
    SchrolabError,
    SupportViolation,
    WindowTooSmall,
)
from .grid import DataFunction, FrequencyGrid, Grid, PotentialKind, PotentialSpec, SpacetimeField

__version__ = "0.1.0"

__all__ = [
    "ChartUndefined",
    "ConfigInvalid",
    "DataFunction",
    "DimensionMismatch",
    "FrequencyGrid",
    "Grid",
    "NoConvergence",
    "NoCounterpart",
    "NotCharacteristic",
    "PotentialKind",
    "PotentialSpec",
    "SchrolabError",
    "SpacetimeField",
    "SupportViolation",
    "WindowTooSmall",
]
