from .csvio import (
    BadTimestamp,
    CsvError,
    InvalidRecordSequence,
    MalformedRow,
    UnknownEvent,
    format_timestamp,
    parse_call_records,
    parse_features,
    parse_registry,
    parse_timestamp,
    serialize_call_records,
    serialize_features,
    serialize_registry,
    validate_record_sequences,
)
from .types import (
    FEATURE_NAMES,
    SEVERITY_LEVELS,
    SUPPORT_LEVELS,
    Actor,
    CallRecord,
    ConfusionMatrix,
    CritSitRegistryEntry,
    EscalationRiskPoint,
    EscalationType,
    EventKind,
    FeatureVector,
    PMR,
    utc_minute,
)

__all__ = [
    "Actor",
    "BadTimestamp",
    "CallRecord",
    "ConfusionMatrix",
    "CritSitRegistryEntry",
    "CsvError",
    "EscalationRiskPoint",
    "EscalationType",
    "EventKind",
    "FEATURE_NAMES",
    "FeatureVector",
    "InvalidRecordSequence",
    "MalformedRow",
    "PMR",
    "SEVERITY_LEVELS",
    "SUPPORT_LEVELS",
    "UnknownEvent",
    "format_timestamp",
    "parse_call_records",
    "parse_features",
    "parse_registry",
    "parse_timestamp",
    "serialize_call_records",
    "serialize_features",
    "serialize_registry",
    "utc_minute",
    "validate_record_sequences",
]
