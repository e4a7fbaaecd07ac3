"""Support-ticket escalation risk platform.

Subpackages:
    core        shared domain types and their CSV serialization
    datagen     synthetic ticket-world generator with a planted escalation signal
    pipeline    cleaning, joining, PMR assembly, customer index, featurization
    forest      from-scratch CART random forest with class rebalancing
    evaluation  k-fold cross-validation, confusion metrics, risk timelines
    service     triage REST API with file-backed persistence
    cli         operator entry point chaining the above
"""

__version__ = "0.1.0"
