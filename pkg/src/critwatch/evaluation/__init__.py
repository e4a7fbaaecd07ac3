from .crossval import (
    EvalReport,
    KeyMismatch,
    Metrics,
    confusion,
    cross_validate,
    metrics,
    train_full,
)
from .folds import BadK, assign_folds
from .timeline import er_timeline, serialize_predictions, serialize_timeline

__all__ = [
    "BadK",
    "EvalReport",
    "KeyMismatch",
    "Metrics",
    "assign_folds",
    "confusion",
    "cross_validate",
    "er_timeline",
    "metrics",
    "serialize_predictions",
    "serialize_timeline",
    "train_full",
]
