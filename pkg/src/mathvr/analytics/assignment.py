"""Seeded partition of graded responses into annotation batches."""

from __future__ import annotations

import random

from mathvr.errors import SizeMismatch


def make_annotation_assignment(
    pool_ids: list[str],
    annotators: int,
    per_annotator: int,
    seed: int,
) -> dict[str, list[str]]:
    """Deterministically deal every response to exactly one annotator.

    Raises ``SizeMismatch`` unless annotators x per_annotator covers the pool
    exactly.
    """
    if annotators < 1 or per_annotator < 1:
        raise SizeMismatch("annotators and per_annotator must be positive")
    if annotators * per_annotator != len(pool_ids):
        raise SizeMismatch(
            f"{annotators} annotators x {per_annotator} != pool of {len(pool_ids)} responses"
        )
    shuffled = list(pool_ids)
    random.Random(seed).shuffle(shuffled)
    width = len(str(annotators))
    return {
        f"annotator_{i + 1:0{width}d}": shuffled[i * per_annotator : (i + 1) * per_annotator]
        for i in range(annotators)
    }
