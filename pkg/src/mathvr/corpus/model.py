"""Data model for Math-VR-format corpora.

A corpus lives under a single root directory: ``manifest.jsonl`` (one header
record, then one record per sample), a taxonomy file, and per-sample asset
directories holding question/solution images. Everything in a sample record
is plain JSON; image paths are relative to the corpus root.
"""

from __future__ import annotations

import posixpath
import re
from dataclasses import dataclass, field, replace
from typing import Iterator

from mathvr.errors import SchemaError

KNOWLEDGE_ROOTS = ("Geometry", "Algebra", "Calculus", "Statistics")
LANGUAGES = ("en", "zh")
SUBSETS = ("text", "multimodal")
IMAGE_ROLES = ("question", "solution")
QTYPE_PARTS = ("single", "multipart")
QTYPE_ANSWERS = ("multiple_choice", "answer_based", "proof_based")

_MD_IMAGE_RE = re.compile(r"!\[[^\]]*\]\(\s*<?([^)\s>]+)>?(?:\s+\"[^\"]*\")?\s*\)")


@dataclass
class ImageAsset:
    """One image file belonging to a sample, path relative to corpus root."""

    id: str
    path: str
    width: int
    height: int
    role: str  # "question" | "solution"

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "path": self.path,
            "width": self.width,
            "height": self.height,
            "role": self.role,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ImageAsset":
        try:
            return cls(
                id=str(obj["id"]),
                path=str(obj["path"]),
                width=int(obj["width"]),
                height=int(obj["height"]),
                role=str(obj["role"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad image asset record: {exc}") from exc


@dataclass(frozen=True)
class KnowledgeTag:
    """Position in the hierarchical knowledge tree: root domain, subdomain, point."""

    root: str
    sub: str
    point: str

    def to_json(self) -> dict:
        return {"root": self.root, "sub": self.sub, "point": self.point}

    @classmethod
    def from_json(cls, obj: dict) -> "KnowledgeTag":
        try:
            return cls(root=str(obj["root"]), sub=str(obj["sub"]), point=str(obj["point"]))
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"bad knowledge tag: {exc}") from exc


@dataclass(frozen=True)
class QType:
    """Question shape: single/multipart crossed with the answer kind."""

    parts: str  # "single" | "multipart"
    answer: str  # "multiple_choice" | "answer_based" | "proof_based"

    def to_json(self) -> dict:
        return {"parts": self.parts, "answer": self.answer}

    @classmethod
    def from_json(cls, obj: dict) -> "QType":
        try:
            return cls(parts=str(obj["parts"]), answer=str(obj["answer"]))
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"bad qtype: {exc}") from exc


@dataclass
class Sample:
    """One bilingual visual-reasoning problem: markdown question + solution.

    Bilingual pairs share an id stem with a ``-en``/``-zh`` suffix; the stem
    is the cross-language link. ``benchmark_eligible`` keeps proof-based and
    excluded multiple-choice samples in the corpus without exporting them.
    """

    id: str
    language: str
    subset: str
    question_md: str
    solution_md: str
    question_images: list[ImageAsset] = field(default_factory=list)
    solution_images: list[ImageAsset] = field(default_factory=list)
    qtype: QType = QType("single", "answer_based")
    knowledge: KnowledgeTag | None = None
    benchmark_eligible: bool = True

    @property
    def id_stem(self) -> str:
        for suffix in ("-en", "-zh"):
            if self.id.endswith(suffix):
                return self.id[: -len(suffix)]
        return self.id

    def images(self) -> Iterator[ImageAsset]:
        yield from self.question_images
        yield from self.solution_images

    def with_knowledge(self, tag: KnowledgeTag) -> "Sample":
        return replace(self, knowledge=tag)

    def to_json(self) -> dict:
        obj = {
            "id": self.id,
            "language": self.language,
            "subset": self.subset,
            "question_md": self.question_md,
            "solution_md": self.solution_md,
            "question_images": [a.to_json() for a in self.question_images],
            "solution_images": [a.to_json() for a in self.solution_images],
            "qtype": self.qtype.to_json(),
            "knowledge": self.knowledge.to_json() if self.knowledge else None,
            "benchmark_eligible": self.benchmark_eligible,
        }
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "Sample":
        if not isinstance(obj, dict):
            raise SchemaError(f"sample record must be an object, got {type(obj).__name__}")
        try:
            knowledge = obj.get("knowledge")
            return cls(
                id=str(obj["id"]),
                language=str(obj["language"]),
                subset=str(obj["subset"]),
                question_md=str(obj["question_md"]),
                solution_md=str(obj["solution_md"]),
                question_images=[ImageAsset.from_json(a) for a in obj.get("question_images", [])],
                solution_images=[ImageAsset.from_json(a) for a in obj.get("solution_images", [])],
                qtype=QType.from_json(obj.get("qtype", {"parts": "single", "answer": "answer_based"})),
                knowledge=KnowledgeTag.from_json(knowledge) if knowledge else None,
                benchmark_eligible=bool(obj.get("benchmark_eligible", True)),
            )
        except KeyError as exc:
            raise SchemaError(f"sample record missing field {exc}") from exc


@dataclass
class CorpusManifest:
    """Immutable-after-load view of one corpus. Safe for concurrent readers."""

    version: str
    samples: list[Sample]
    taxonomy_path: str

    def __len__(self) -> int:
        return len(self.samples)

    def by_id(self, sample_id: str) -> Sample:
        for s in self.samples:
            if s.id == sample_id:
                return s
        raise KeyError(sample_id)

    def ids(self) -> set[str]:
        return {s.id for s in self.samples}


class Taxonomy:
    """Hierarchical knowledge tree: root domain -> subdomain -> [points]."""

    def __init__(self, tree: dict[str, dict[str, list[str]]]):
        for root in tree:
            if root not in KNOWLEDGE_ROOTS:
                raise SchemaError(f"unknown root domain in taxonomy: {root!r}")
        self.tree = tree

    def contains(self, tag: KnowledgeTag) -> bool:
        subs = self.tree.get(tag.root)
        if subs is None:
            return False
        points = subs.get(tag.sub)
        return points is not None and tag.point in points

    def roots(self) -> list[str]:
        return list(self.tree)

    def tags(self) -> Iterator[KnowledgeTag]:
        for root, subs in self.tree.items():
            for sub, points in subs.items():
                for point in points:
                    yield KnowledgeTag(root, sub, point)


@dataclass(frozen=True)
class Violation:
    """One failed validation rule; violations are data, not exceptions."""

    rule: str
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.rule}({self.field}): {self.message}"


def markdown_image_refs(md: str) -> list[str]:
    """Paths referenced by ``![alt](path)`` images in markdown text."""
    return _MD_IMAGE_RE.findall(md)


def _path_escapes_root(rel_path: str) -> bool:
    if posixpath.isabs(rel_path) or rel_path.startswith("~"):
        return True
    normalized = posixpath.normpath(rel_path)
    return normalized.startswith("..") or normalized == "."


def validate_sample(s: Sample, taxonomy: Taxonomy | None = None) -> list[Violation]:
    """Check every sample invariant; empty list means the sample is valid.

    ``taxonomy`` enables the knowledge-tag membership check; without it only
    structural rules run.
    """
    out: list[Violation] = []

    if not s.id:
        out.append(Violation("EmptyField", "id", "sample id must be nonempty"))
    if s.language not in LANGUAGES:
        out.append(Violation("BadEnum", "language", f"{s.language!r} not in {LANGUAGES}"))
    if s.subset not in SUBSETS:
        out.append(Violation("BadEnum", "subset", f"{s.subset!r} not in {SUBSETS}"))
    if s.qtype.parts not in QTYPE_PARTS:
        out.append(Violation("BadEnum", "qtype.parts", f"{s.qtype.parts!r} not in {QTYPE_PARTS}"))
    if s.qtype.answer not in QTYPE_ANSWERS:
        out.append(Violation("BadEnum", "qtype.answer", f"{s.qtype.answer!r} not in {QTYPE_ANSWERS}"))

    # subset label must agree with the presence of question images
    if s.subset == "multimodal" and not s.question_images:
        out.append(Violation("SubsetMismatch", "subset", "multimodal sample has no question images"))
    if s.subset == "text" and s.question_images:
        out.append(Violation("SubsetMismatch", "subset", "text sample declares question images"))

    # the corpus requires at least one figure in every reasoning process
    if not s.solution_images:
        out.append(Violation("NoSolutionFigure", "solution_images", "solution has no images"))

    declared = {a.path for a in s.images()}
    for asset in s.images():
        if asset.width < 1 or asset.height < 1:
            out.append(
                Violation(
                    "BadImageDims",
                    f"image:{asset.id}",
                    f"{asset.width}x{asset.height} must be at least 1x1",
                )
            )
        if _path_escapes_root(asset.path):
            out.append(
                Violation("UnsafeAssetPath", f"image:{asset.id}", f"path escapes corpus root: {asset.path!r}")
            )
        expected_role = "question" if asset in s.question_images else "solution"
        if asset.role != expected_role:
            out.append(
                Violation("RoleMismatch", f"image:{asset.id}", f"role {asset.role!r} in {expected_role} list")
            )

    for field_name, md in (("question_md", s.question_md), ("solution_md", s.solution_md)):
        for ref in markdown_image_refs(md):
            if ref not in declared:
                out.append(
                    Violation("UnresolvedImageRef", field_name, f"markdown references undeclared image {ref!r}")
                )

    if s.knowledge is not None:
        if s.knowledge.root not in KNOWLEDGE_ROOTS:
            out.append(
                Violation("BadEnum", "knowledge.root", f"{s.knowledge.root!r} not in {KNOWLEDGE_ROOTS}")
            )
        if not s.knowledge.sub or not s.knowledge.point:
            out.append(Violation("EmptyField", "knowledge", "sub and point must be nonempty"))
        if taxonomy is not None and not taxonomy.contains(s.knowledge):
            out.append(
                Violation(
                    "UnknownKnowledgeTag",
                    "knowledge",
                    f"({s.knowledge.root}, {s.knowledge.sub}, {s.knowledge.point}) not in taxonomy",
                )
            )

    return out
