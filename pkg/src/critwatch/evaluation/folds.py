"""Per-ticket fold assignment for cross-validation.

Each id independently draws a uniform fold from a keyed hash, mirroring
random-number fold assignment: folds need not be equal-sized, but the
assignment is a total partition, deterministic per seed, and independent
of input order. Assignment is always per ticket, never per stage, so one
ticket's stages can never straddle train and test.
"""

from __future__ import annotations

import hashlib
from typing import Iterable


class BadK(ValueError):
    def __init__(self, k: int):
        super().__init__(f"fold count must be >= 2, got {k}")


def assign_folds(pmr_ids: Iterable[str], k: int, seed: int) -> dict[str, int]:
    if k < 2:
        raise BadK(k)
    key = (seed & ((1 << 64) - 1)).to_bytes(8, "little")
    out = {}
    for pmr_id in pmr_ids:
        digest = hashlib.blake2b(pmr_id.encode("utf-8"), key=key, digest_size=8).digest()
        out[pmr_id] = 1 + int.from_bytes(digest, "big") % k
    return out
