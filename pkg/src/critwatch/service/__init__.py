from .api import ServiceState, create_app, run_server
from .store import (
    Comment,
    EmptyText,
    OutOfRange,
    TriageRecord,
    TriageStore,
    UnknownPmr,
    signed_percent,
)
from .triage import ModelMissing, get_pmr_detail, rescore_all

__all__ = [
    "Comment",
    "EmptyText",
    "ModelMissing",
    "OutOfRange",
    "ServiceState",
    "TriageRecord",
    "TriageStore",
    "UnknownPmr",
    "create_app",
    "get_pmr_detail",
    "rescore_all",
    "run_server",
    "signed_percent",
]
