from mathvr.corpus.model import (
    ImageAsset,
    KnowledgeTag,
    Sample,
    CorpusManifest,
    QType,
    Taxonomy,
    Violation,
    validate_sample,
)
from mathvr.corpus.manifest import load_manifest, save_manifest, load_taxonomy
from mathvr.corpus.stats import CorpusStats, compute_stats, split_subsets
from mathvr.corpus.curation import RawRecord, RawImage, Rejected, curate_raw, classify_knowledge

__all__ = [
    "ImageAsset",
    "KnowledgeTag",
    "Sample",
    "CorpusManifest",
    "QType",
    "Taxonomy",
    "Violation",
    "validate_sample",
    "load_manifest",
    "save_manifest",
    "load_taxonomy",
    "CorpusStats",
    "compute_stats",
    "split_subsets",
    "RawRecord",
    "RawImage",
    "Rejected",
    "curate_raw",
    "classify_knowledge",
]
