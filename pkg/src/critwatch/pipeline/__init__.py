from .assembly import (
    MissingOpen,
    NonMonotonicTimestamps,
    assemble_pmrs,
    classify_escalation_type,
    customer_id_of,
    escalation_types,
)
from .cleaning import (
    CRITSIT_ID_PATTERN,
    CleanReport,
    DuplicateRegistryId,
    JoinReport,
    clean_critsit_ids,
    join_critsit_dates,
)
from .features import StageOutOfRange, featurize_dataset, featurize_stage, featurize_stages
from .index import CustomerIndex, ProfileSnapshot, build_customer_index, minus_months
from .stats import average_response_minutes, response_minutes

__all__ = [
    "CRITSIT_ID_PATTERN",
    "CleanReport",
    "CustomerIndex",
    "DuplicateRegistryId",
    "JoinReport",
    "MissingOpen",
    "NonMonotonicTimestamps",
    "ProfileSnapshot",
    "StageOutOfRange",
    "assemble_pmrs",
    "average_response_minutes",
    "build_customer_index",
    "classify_escalation_type",
    "clean_critsit_ids",
    "customer_id_of",
    "escalation_types",
    "featurize_dataset",
    "featurize_stage",
    "featurize_stages",
    "join_critsit_dates",
    "minus_months",
    "response_minutes",
]
