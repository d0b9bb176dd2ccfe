"""Exact finite-field laboratory for distance sets, sumsets and incidences."""
from .errors import BudgetExceededError, ConfigError, EmptySetError, FFDistError, FieldMismatchError
from .field import (
    DoublingStats,
    FpSet,
    PrimeField,
    RepHistogram,
    difference_set,
    doubling_stats,
    iterated_sumset,
    rep_function,
    square_set,
    sumset,
)

__version__ = "0.1.0"
