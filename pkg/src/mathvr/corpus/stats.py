"""Corpus statistics and subset partitioning.

Statistics mirror the published benchmark summary shape: token-length
min/max/mean for questions and solutions, image count/resolution summaries,
subset counts, and a per-domain histogram. Token numbers depend entirely on
the injected counter.

Averaging conventions (documented, not universal):
  * question-image count/resolution averages run over samples that have at
    least one question image (the multimodal subset);
  * solution-image averages run over all samples (every valid sample has
    at least one solution figure);
  * mean resolution is the arithmetic mean of widths and of heights,
    rendered as "WxH".
"""

from __future__ import annotations

from dataclasses import dataclass

from mathvr.corpus.model import CorpusManifest, Sample
from mathvr.errors import EmptyCorpus
from mathvr.tokens import TokenCounter


@dataclass(frozen=True)
class TokenStats:
    min: int
    max: int
    mean: float


@dataclass(frozen=True)
class ImageStats:
    max_count: int
    mean_count: float
    mean_width: float
    mean_height: float

    @property
    def mean_resolution(self) -> str:
        return f"{round(self.mean_width)}x{round(self.mean_height)}"


@dataclass(frozen=True)
class CorpusStats:
    question_tokens: TokenStats
    solution_tokens: TokenStats
    question_images: ImageStats
    solution_images: ImageStats
    subset_counts: dict[str, int]
    category_histogram: dict[str, int]

    def to_json(self) -> dict:
        return {
            "question_tokens": vars(self.question_tokens),
            "solution_tokens": vars(self.solution_tokens),
            "question_images": {**vars(self.question_images), "mean_resolution": self.question_images.mean_resolution},
            "solution_images": {**vars(self.solution_images), "mean_resolution": self.solution_images.mean_resolution},
            "subset_counts": self.subset_counts,
            "category_histogram": self.category_histogram,
        }


def _token_stats(counts: list[int]) -> TokenStats:
    return TokenStats(min=min(counts), max=max(counts), mean=sum(counts) / len(counts))


def _image_stats(per_sample_counts: list[int], dims: list[tuple[int, int]]) -> ImageStats:
    if not per_sample_counts:
        return ImageStats(0, 0.0, 0.0, 0.0)
    mean_w = sum(w for w, _ in dims) / len(dims) if dims else 0.0
    mean_h = sum(h for _, h in dims) / len(dims) if dims else 0.0
    return ImageStats(
        max_count=max(per_sample_counts),
        mean_count=sum(per_sample_counts) / len(per_sample_counts),
        mean_width=mean_w,
        mean_height=mean_h,
    )


def compute_stats(manifest: CorpusManifest, counter: TokenCounter) -> CorpusStats:
    """Deterministic corpus summary for a fixed counter; raises ``EmptyCorpus``."""
    samples = manifest.samples
    if not samples:
        raise EmptyCorpus("cannot compute statistics over an empty manifest")

    q_tokens = [counter.count(s.question_md) for s in samples]
    s_tokens = [counter.count(s.solution_md) for s in samples]

    multimodal = [s for s in samples if s.question_images]
    q_counts = [len(s.question_images) for s in multimodal]
    q_dims = [(a.width, a.height) for s in multimodal for a in s.question_images]
    s_counts = [len(s.solution_images) for s in samples]
    s_dims = [(a.width, a.height) for s in samples for a in s.solution_images]

    subset_counts = {"text": 0, "multimodal": 0}
    for s in samples:
        subset_counts[s.subset] += 1

    histogram: dict[str, int] = {}
    for s in samples:
        root = s.knowledge.root if s.knowledge else "Uncategorized"
        histogram[root] = histogram.get(root, 0) + 1

    return CorpusStats(
        question_tokens=_token_stats(q_tokens),
        solution_tokens=_token_stats(s_tokens),
        question_images=_image_stats(q_counts, q_dims),
        solution_images=_image_stats(s_counts, s_dims),
        subset_counts=subset_counts,
        category_histogram=histogram,
    )


def split_subsets(manifest: CorpusManifest) -> tuple[list[Sample], list[Sample]]:
    """Partition samples into (text, multimodal) by their subset label."""
    text = [s for s in manifest.samples if s.subset == "text"]
    multimodal = [s for s in manifest.samples if s.subset == "multimodal"]
    return text, multimodal
