"""Random forest training, prediction, and versioned JSON persistence.

Each tree trains on a seeded bootstrap (n draws with replacement) of the
rebalanced training rows. Identical (row, label) pairs are collapsed into
weighted rows before growth, which yields exactly the same trees as
materializing every duplicate. The ensemble's escalation risk is the mean
over trees of the landed leaf's positive-class fraction.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from ..core import FEATURE_NAMES, EscalationType, FeatureVector
from ._tree import grow_tree, leaf_fractions
from .sampling import SingleClass, oversample, undersample

MODEL_FORMAT = "critwatch-random-forest"
MODEL_VERSION = 1

_ETYPE_ORDINAL = {
    EscalationType.NONE: 0.0,
    EscalationType.CAUSE: 1.0,
    EscalationType.CASCADE: 2.0,
}

_MASK = (1 << 64) - 1


class EmptyDataset(ValueError):
    def __init__(self) -> None:
        super().__init__("dataset is empty")


class ArityMismatch(ValueError):
    def __init__(self, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(f"expected {expected} features, got {got}")


class BadVersion(ValueError):
    def __init__(self, version: object):
        super().__init__(f"unsupported model version {version!r}")


class CorruptModel(ValueError):
    pass


class Balance(str, enum.Enum):
    OVERSAMPLE = "oversample"
    UNDERSAMPLE = "undersample"
    NONE = "none"


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int = 0  # 0 = unlimited
    min_samples_leaf: int = 1
    features_per_split: int = 0  # 0 = ceil(sqrt(d))
    balance: Balance = Balance.OVERSAMPLE
    threshold: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must be in (0,1)")
        if self.max_depth < 0 or self.min_samples_leaf < 1 or self.features_per_split < 0:
            raise ValueError("invalid tree size parameters")

    def to_json_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "features_per_split": self.features_per_split,
            "balance": self.balance.value,
            "threshold": self.threshold,
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ForestParams":
        return cls(
            n_trees=int(data["n_trees"]),
            max_depth=int(data["max_depth"]),
            min_samples_leaf=int(data["min_samples_leaf"]),
            features_per_split=int(data["features_per_split"]),
            balance=Balance(data["balance"]),
            threshold=float(data["threshold"]),
            seed=int(data["seed"]),
        )


@dataclass
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    pos: np.ndarray
    neg: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "pos": self.pos.tolist(),
            "neg": self.neg.tolist(),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "Tree":
        return cls(
            feature=np.asarray(data["feature"], dtype=np.int32),
            threshold=np.asarray(data["threshold"], dtype=np.float64),
            left=np.asarray(data["left"], dtype=np.int32),
            right=np.asarray(data["right"], dtype=np.int32),
            pos=np.asarray(data["pos"], dtype=np.int64),
            neg=np.asarray(data["neg"], dtype=np.int64),
        )


@dataclass
class RandomForestModel:
    params: ForestParams
    feature_names: tuple[str, ...]
    trees: list[Tree]

    @property
    def n_features(self) -> int:
        return len(self.feature_names)


def _splitmix64(seed: int, i: int) -> int:
    z = (seed + (i + 1) * 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def model_feature_names(include_escalation_type: bool = False) -> tuple[str, ...]:
    names = tuple(FEATURE_NAMES)
    if include_escalation_type:
        names += ("escalation_type",)
    return names


def to_matrix(
    dataset: Sequence[FeatureVector], include_escalation_type: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """Feature matrix and 0/1 label vector in dataset order."""
    n = len(dataset)
    d = len(FEATURE_NAMES) + (1 if include_escalation_type else 0)
    X = np.empty((n, d), dtype=np.float64)
    y = np.empty(n, dtype=np.int8)
    for i, v in enumerate(dataset):
        X[i, : len(FEATURE_NAMES)] = v.values()
        if include_escalation_type:
            X[i, -1] = _ETYPE_ORDINAL[v.escalation_type]
        y[i] = 1 if v.label else 0
    return X, y


def _vector_for(model: RandomForestModel, fv: FeatureVector) -> np.ndarray:
    values = list(fv.values())
    if model.feature_names and model.feature_names[-1] == "escalation_type":
        values.append(_ETYPE_ORDINAL[fv.escalation_type])
    return np.asarray(values, dtype=np.float64)


def fit_tree(
    X: np.ndarray,
    y: np.ndarray,
    weights: np.ndarray,
    max_depth: int,
    min_samples_leaf: int,
    features_per_split: int,
    seed: int,
) -> Tree:
    """Grow a single deterministic CART on weighted rows (exposed for tests)."""
    arrays = grow_tree(
        np.ascontiguousarray(X, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.int8),
        np.ascontiguousarray(weights, dtype=np.int64),
        max_depth,
        min_samples_leaf,
        features_per_split,
        seed & 0x7FFFFFFFFFFFFFFF,
    )
    return Tree(*arrays)


def train(
    dataset: Sequence[FeatureVector],
    params: ForestParams,
    include_escalation_type: bool = False,
) -> RandomForestModel:
    """Rebalance per params, then grow seeded bootstrap trees."""
    if len(dataset) == 0:
        raise EmptyDataset()
    if len(dataset) < 2:
        raise SingleClass()

    if params.balance is Balance.OVERSAMPLE:
        balanced = oversample(dataset, params.seed)
    elif params.balance is Balance.UNDERSAMPLE:
        balanced = undersample(dataset, params.seed)
    else:
        balanced = list(dataset)
        if all(v.label for v in balanced) or not any(v.label for v in balanced):
            raise SingleClass()

    X, y = to_matrix(balanced, include_escalation_type)
    n, d = X.shape
    k = params.features_per_split if params.features_per_split > 0 else math.ceil(math.sqrt(d))
    k = min(k, d)

    # Collapse identical (row, label) pairs; weighted growth is equivalent.
    stacked = np.column_stack([X, y.astype(np.float64)])
    unique, inverse = np.unique(stacked, axis=0, return_inverse=True)
    Xu = np.ascontiguousarray(unique[:, :-1])
    yu = np.ascontiguousarray(unique[:, -1].astype(np.int8))
    base = np.bincount(inverse, minlength=len(unique))

    trees = []
    for i in range(params.n_trees):
        tree_seed = _splitmix64(params.seed, i)
        rng = np.random.default_rng(tree_seed)
        draws = rng.integers(0, n, n)
        weights = np.bincount(inverse[draws], minlength=len(unique)).astype(np.int64)
        trees.append(
            fit_tree(
                Xu,
                yu,
                weights,
                params.max_depth,
                params.min_samples_leaf,
                k,
                _splitmix64(tree_seed, 1),
            )
        )
    del base
    return RandomForestModel(
        params=params,
        feature_names=model_feature_names(include_escalation_type),
        trees=trees,
    )


def predict_er_batch(model: RandomForestModel, X: np.ndarray) -> np.ndarray:
    """Escalation risk in [0,1] for each row of X."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ArityMismatch(model.n_features, X.shape[1] if X.ndim == 2 else -1)
    acc = np.zeros(X.shape[0], dtype=np.float64)
    for tree in model.trees:
        acc += leaf_fractions(
            X, tree.feature, tree.threshold, tree.left, tree.right, tree.pos, tree.neg
        )
    return acc / len(model.trees)


def predict_er(model: RandomForestModel, fv: Union[FeatureVector, Sequence[float]]) -> float:
    """Escalation risk for a single ticket stage."""
    if isinstance(fv, FeatureVector):
        row = _vector_for(model, fv)
    else:
        row = np.asarray(fv, dtype=np.float64)
    if row.shape != (model.n_features,):
        raise ArityMismatch(model.n_features, int(row.shape[0]) if row.ndim == 1 else -1)
    return float(predict_er_batch(model, row.reshape(1, -1))[0])


def classify(er: float, threshold: float) -> bool:
    """A ticket is flagged only when its risk strictly exceeds the threshold."""
    return er > threshold


def save_model(model: RandomForestModel) -> bytes:
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "params": model.params.to_json_dict(),
        "feature_names": list(model.feature_names),
        "trees": [t.to_json_dict() for t in model.trees],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def load_model(data: bytes) -> RandomForestModel:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptModel(f"not valid model JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise CorruptModel("missing or wrong format marker")
    if doc.get("version") != MODEL_VERSION:
        raise BadVersion(doc.get("version"))
    try:
        params = ForestParams.from_json_dict(doc["params"])
        feature_names = tuple(str(n) for n in doc["feature_names"])
        trees = [Tree.from_json_dict(t) for t in doc["trees"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModel(f"malformed model document: {exc}") from None
    if not trees:
        raise CorruptModel("model has no trees")
    for t in trees:
        if t.feature.size and int(t.feature.max()) >= len(feature_names):
            raise CorruptModel("split feature index out of range")
    return RandomForestModel(params=params, feature_names=feature_names, trees=trees)
