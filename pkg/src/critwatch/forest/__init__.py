from .model import (
    ArityMismatch,
    BadVersion,
    Balance,
    CorruptModel,
    EmptyDataset,
    ForestParams,
    RandomForestModel,
    Tree,
    classify,
    fit_tree,
    load_model,
    model_feature_names,
    predict_er,
    predict_er_batch,
    save_model,
    to_matrix,
    train,
)
from .sampling import SingleClass, oversample, undersample

__all__ = [
    "ArityMismatch",
    "BadVersion",
    "Balance",
    "CorruptModel",
    "EmptyDataset",
    "ForestParams",
    "RandomForestModel",
    "SingleClass",
    "Tree",
    "classify",
    "fit_tree",
    "load_model",
    "model_feature_names",
    "oversample",
    "predict_er",
    "predict_er_batch",
    "save_model",
    "to_matrix",
    "train",
    "undersample",
]
