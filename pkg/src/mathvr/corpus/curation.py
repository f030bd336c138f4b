"""Model-backed curation stages for raw scraped problems.

Three pluggable stages turn a raw record into a standardized sample or a
rejection: (1) label every image as mathematical / textual / irrelevant and
drop records whose reasoning keeps no mathematical figure, (2) rewrite the
question and solution into clean markdown, (3) a final quality check that
discards incomplete or incoherent problems. A fourth stage assigns a
knowledge tag from the loaded taxonomy. All stages go through the same chat
client interface as the judge, so tests drive them with playback scripts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from mathvr.clients import ChatClient, ChatMessage
from mathvr.corpus.model import ImageAsset, KnowledgeTag, QType, Sample, Taxonomy
from mathvr.errors import UnmappableLabel
from mathvr.judge.jsonparse import parse_judge_json

REJECTION_REASONS = ("irrelevant_images", "incomplete", "incoherent", "text_only_solution")

IMAGE_LABEL_PROMPT = """\
Label each listed image of a math problem as one of: mathematical (a geometric diagram,
function plot, or other figure needed for reasoning), textual (a picture of text), or
irrelevant (decoration, logos, unrelated photos).

Question text:
{question}

Solution text:
{solution}

Images:
{images}

Reply with JSON only: {{"labels": {{"<image id>": "mathematical"|"textual"|"irrelevant", ...}}}}"""

STANDARDIZE_PROMPT = """\
Rewrite the following math problem into two clean Markdown documents, one for the question
and one for the full solution. Preserve every image reference of the form ![](path) exactly
where it belongs. Also classify the question structure.

Question text:
{question}

Solution text:
{solution}

Reply with JSON only:
{{"question_md": "...", "solution_md": "...",
 "qtype": {{"parts": "single"|"multipart", "answer": "multiple_choice"|"answer_based"|"proof_based"}}}}"""

QUALITY_PROMPT = """\
Check this standardized math problem for completeness and coherence. A problem is incomplete
when question or solution is truncated or missing required information; incoherent when the
solution does not address the question.

Question:
{question}

Solution:
{solution}

Reply with JSON only: {{"verdict": "ok"|"incomplete"|"incoherent", "reason": "..."}}"""

CLASSIFY_PROMPT = """\
Assign this math problem one knowledge tag from the taxonomy below. Pick the single best
(root, sub, point) path.

Taxonomy:
{taxonomy}

Question:
{question}

Solution:
{solution}

Reply with JSON only: {{"root": "...", "sub": "...", "point": "..."}}"""


@dataclass
class RawImage:
    id: str
    path: str
    width: int
    height: int


@dataclass
class RawRecord:
    """A scraped problem before curation: free-form text plus image files."""

    id: str
    language: str
    question_text: str
    solution_text: str
    question_images: list[RawImage] = field(default_factory=list)
    solution_images: list[RawImage] = field(default_factory=list)


@dataclass(frozen=True)
class Rejected:
    """Curation refused the record; reason is one of REJECTION_REASONS."""

    record_id: str
    reason: str
    detail: str = ""


def _ask(client: ChatClient, prompt: str, schema: dict | None = None) -> dict:
    reply = client.complete([ChatMessage.text("user", prompt)])
    return parse_judge_json(reply.text, schema)


def curate_raw(raw: RawRecord, judge: ChatClient) -> Sample | Rejected:
    """Run the full curation pipeline on one raw record."""
    image_lines = "\n".join(
        f"- {img.id}: {img.path} ({img.width}x{img.height})"
        for img in [*raw.question_images, *raw.solution_images]
    ) or "(none)"
    labels_obj = _ask(
        judge,
        IMAGE_LABEL_PROMPT.format(question=raw.question_text, solution=raw.solution_text, images=image_lines),
        {"type": "object", "required": ["labels"], "properties": {"labels": {"type": "object"}}},
    )
    labels = {str(k): str(v) for k, v in labels_obj["labels"].items()}

    def mathematical(images: list[RawImage]) -> list[RawImage]:
        return [img for img in images if labels.get(img.id) == "mathematical"]

    kept_solution = mathematical(raw.solution_images)
    if not kept_solution:
        if raw.solution_images:
            return Rejected(raw.id, "irrelevant_images", "no mathematical figure among solution images")
        return Rejected(raw.id, "text_only_solution", "solution has no images at all")
    kept_question = mathematical(raw.question_images)

    std = _ask(
        judge,
        STANDARDIZE_PROMPT.format(question=raw.question_text, solution=raw.solution_text),
        {"type": "object", "required": ["question_md", "solution_md"]},
    )
    question_md = str(std["question_md"])
    solution_md = str(std["solution_md"])
    qtype_obj = std.get("qtype", {})
    qtype = QType(
        parts=str(qtype_obj.get("parts", "single")),
        answer=str(qtype_obj.get("answer", "answer_based")),
    )

    quality = _ask(
        judge,
        QUALITY_PROMPT.format(question=question_md, solution=solution_md),
        {"type": "object", "required": ["verdict"]},
    )
    verdict = str(quality["verdict"])
    if verdict in ("incomplete", "incoherent"):
        return Rejected(raw.id, verdict, str(quality.get("reason", "")))

    def to_assets(images: list[RawImage], role: str) -> list[ImageAsset]:
        return [ImageAsset(id=i.id, path=i.path, width=i.width, height=i.height, role=role) for i in images]

    return Sample(
        id=raw.id,
        language=raw.language,
        subset="multimodal" if kept_question else "text",
        question_md=question_md,
        solution_md=solution_md,
        question_images=to_assets(kept_question, "question"),
        solution_images=to_assets(kept_solution, "solution"),
        qtype=qtype,
        knowledge=None,
        benchmark_eligible=qtype.answer == "answer_based",
    )


def classify_knowledge(sample: Sample, judge: ChatClient, taxonomy: Taxonomy) -> KnowledgeTag:
    """Assign a taxonomy tag; one retry before ``UnmappableLabel``.

    The returned tag is also persisted onto the sample.
    """
    prompt = CLASSIFY_PROMPT.format(
        taxonomy=json.dumps(taxonomy.tree, ensure_ascii=False, indent=1),
        question=sample.question_md,
        solution=sample.solution_md,
    )
    schema = {"type": "object", "required": ["root", "sub", "point"]}
    last_tag = None
    for _ in range(2):
        obj = _ask(judge, prompt, schema)
        tag = KnowledgeTag(root=str(obj["root"]), sub=str(obj["sub"]), point=str(obj["point"]))
        if taxonomy.contains(tag):
            sample.knowledge = tag
            return tag
        last_tag = tag
        prompt += "\n\nThat tag was not in the taxonomy. Choose an existing (root, sub, point) path exactly as written."
    raise UnmappableLabel(f"sample {sample.id}: judge label {last_tag} not in taxonomy after retry")
