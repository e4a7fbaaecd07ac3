"""Class rebalancing by whole-row replication or majority subsampling.

Applied to training rows only, after any train/test split. Oversampling
replicates each minority row floor(M/m) times and distributes the
remainder by a seeded draw without replacement, so class counts come out
equal. Undersampling keeps a seeded uniform subset of the majority.
"""

from __future__ import annotations

from typing import Sequence, TypeVar

import numpy as np

from ..core import FeatureVector

T = TypeVar("T", bound=FeatureVector)


class SingleClass(ValueError):
    def __init__(self) -> None:
        super().__init__("dataset must contain both classes")


def _split_classes(dataset: Sequence[T]) -> tuple[list[T], list[T]]:
    pos = [v for v in dataset if v.label]
    neg = [v for v in dataset if not v.label]
    if not pos or not neg:
        raise SingleClass()
    return pos, neg


def oversample(dataset: Sequence[T], seed: int) -> list[T]:
    """Replicate minority rows until class counts are equal; seeded shuffle."""
    pos, neg = _split_classes(dataset)
    minority, majority = (pos, neg) if len(pos) <= len(neg) else (neg, pos)
    rng = np.random.default_rng(seed)

    full, extra = divmod(len(majority), len(minority))
    combined = list(majority)
    for row in minority:
        combined.extend([row] * full)
    if extra:
        picks = rng.choice(len(minority), size=extra, replace=False)
        combined.extend(minority[int(i)] for i in sorted(picks))
    order = rng.permutation(len(combined))
    return [combined[int(i)] for i in order]


def undersample(dataset: Sequence[T], seed: int) -> list[T]:
    """Subsample the majority down to the minority count; input order kept."""
    pos_idx = [i for i, v in enumerate(dataset) if v.label]
    neg_idx = [i for i, v in enumerate(dataset) if not v.label]
    if not pos_idx or not neg_idx:
        raise SingleClass()
    minority_idx, majority_idx = (
        (pos_idx, neg_idx) if len(pos_idx) <= len(neg_idx) else (neg_idx, pos_idx)
    )
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(majority_idx), size=len(minority_idx), replace=False)
    keep = set(minority_idx) | {majority_idx[int(i)] for i in picks}
    return [dataset[i] for i in sorted(keep)]
