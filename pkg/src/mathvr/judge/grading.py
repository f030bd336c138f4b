"""Response grading and the two benchmark metrics.

Stage two of the pipeline: the judge receives the question, the model's
solution, the reference answer and the rubric, and returns a verdict. Two
metrics derive from it:

  * Answer Correctness (AC) is binary: 1 only when the final answer is fully
    correct; any error or omission gives 0.
  * Process Score (PS) grants partial credit. A fully correct answer is
    forced to 100. Otherwise PS = alpha * (sum of awarded point values /
    sum of all point values) * 100, with alpha the discount factor (0.7 by
    default), computed in exact rational arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from mathvr.clients import ChatClient, ChatMessage, TextPart
from mathvr.errors import InconsistentVerdict, InvalidMeta, MetaMismatch
from mathvr.judge.config import JudgeConfig
from mathvr.judge.meta import SampleMeta, ask_with_json_repair, sample_image_parts
from mathvr.judge.prompts import GRADING_PLACEHOLDERS, GRADING_TEMPLATE, fill_template, load_template
from mathvr.corpus.model import Sample


class _AllPoints:
    """Sentinel: every scoring point awarded (fully correct solutions)."""

    def __repr__(self) -> str:
        return "ALL"

    def __reduce__(self):
        return (_all_points_instance, ())


def _all_points_instance() -> "_AllPoints":
    return ALL


ALL = _AllPoints()

GRADE_SCHEMA = {
    "type": "object",
    "required": ["is_fully_correct", "awarded_points", "final_score"],
    "properties": {
        "is_fully_correct": {"type": ["boolean", "string"]},
        "awarded_points": {"type": "array"},
        "final_score": {"type": ["number", "string"]},
    },
}

INCONSISTENT_NUDGE = (
    "Your previous evaluation was internally inconsistent ({detail}). "
    "Re-evaluate and reply with JSON only, keeping is_fully_correct, awarded_points and final_score consistent."
)


@dataclass
class GradeVerdict:
    """Judge output for one response, normalized and self-consistent."""

    sample_id: str
    is_fully_correct: bool
    awarded_points: tuple[str, ...] | _AllPoints
    final_score: int
    raw_judge_reply: str = ""

    @property
    def all_awarded(self) -> bool:
        return isinstance(self.awarded_points, _AllPoints)

    def to_json(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "is_fully_correct": self.is_fully_correct,
            "awarded_points": "all" if self.all_awarded else list(self.awarded_points),
            "final_score": self.final_score,
            "raw_judge_reply": self.raw_judge_reply,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GradeVerdict":
        awarded = obj["awarded_points"]
        return cls(
            sample_id=str(obj["sample_id"]),
            is_fully_correct=bool(obj["is_fully_correct"]),
            awarded_points=ALL if awarded == "all" else tuple(awarded),
            final_score=int(obj["final_score"]),
            raw_judge_reply=str(obj.get("raw_judge_reply", "")),
        )


@dataclass(frozen=True)
class QuestionScore:
    """Per-question metrics: binary AC and PS in [0, 100]."""

    sample_id: str
    ac: int  # 0 or 1
    ps: float

    def to_json(self) -> dict:
        return {"sample_id": self.sample_id, "ac": self.ac, "ps": self.ps}

    @classmethod
    def from_json(cls, obj: dict) -> "QuestionScore":
        return cls(sample_id=str(obj["sample_id"]), ac=int(obj["ac"]), ps=float(obj["ps"]))


def _coerce_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str):
        return value.strip().lower() == "true"
    return bool(value)


def _verdict_from_reply(obj: dict, raw: str, meta: SampleMeta) -> GradeVerdict:
    """Normalize a reply object, enforcing the verdict's internal invariants.

    Raises ``InconsistentVerdict`` when the fully-correct flag, the awarded
    set and the final score do not agree with each other or with the rubric.
    """
    fully = _coerce_bool(obj["is_fully_correct"])
    raw_awarded = obj["awarded_points"]
    labels = [str(a).strip() for a in raw_awarded]
    is_all = len(labels) == 1 and labels[0].lower() == "all"
    try:
        final_score = int(round(float(obj["final_score"])))
    except (TypeError, ValueError) as exc:
        raise InconsistentVerdict(f"{meta.sample_id}: non-numeric final_score {obj['final_score']!r}") from exc

    if fully or is_all:
        if not (fully and is_all):
            raise InconsistentVerdict(
                f"{meta.sample_id}: is_fully_correct={fully} but awarded_points={labels}"
            )
        if final_score != meta.max_score:
            raise InconsistentVerdict(
                f"{meta.sample_id}: fully correct but final_score {final_score} != max_score {meta.max_score}"
            )
        return GradeVerdict(meta.sample_id, True, ALL, final_score, raw)

    unknown = [p for p in labels if p not in meta.point_values]
    if unknown:
        raise InconsistentVerdict(f"{meta.sample_id}: awarded unknown point ids {unknown}")
    if len(set(labels)) != len(labels):
        labels = list(dict.fromkeys(labels))
    awarded_sum = sum(meta.point_values[p] for p in labels)
    if final_score != awarded_sum:
        raise InconsistentVerdict(
            f"{meta.sample_id}: final_score {final_score} != sum of awarded values {awarded_sum}"
        )
    if awarded_sum == meta.max_score:
        raise InconsistentVerdict(
            f"{meta.sample_id}: every point awarded but is_fully_correct is false"
        )
    return GradeVerdict(meta.sample_id, False, tuple(labels), final_score, raw)


def grade(
    sample: Sample,
    meta: SampleMeta,
    response: str,
    client: ChatClient,
    cfg: JudgeConfig,
    *,
    allow_unverified: bool = False,
    corpus_root=None,
    cache=None,
) -> GradeVerdict:
    """Grade one model response against a sample's rubric.

    The prompt is the verbatim grading template with only the declared
    placeholders substituted; question images are attached as image parts
    when the sample is multimodal. An internally inconsistent verdict gets
    exactly one re-ask before ``InconsistentVerdict`` propagates.
    """
    if not meta.verified and not allow_unverified:
        raise InvalidMeta(f"meta for {meta.sample_id} is unverified; pass allow_unverified=True to grade anyway")
    if not response.strip():
        raise ValueError("response must be nonempty")
    meta.validate()

    template = load_template(GRADING_TEMPLATE)
    prompt = fill_template(
        template,
        {
            "question": sample.question_md,
            "question_id": sample.id,
            "model_response": response,
            "correct_answer": json.dumps(meta.answer_summary, ensure_ascii=False),
            "max_score": str(meta.max_score),
            "scoring_points": json.dumps(meta.scoring_points, ensure_ascii=False),
            "point_values": json.dumps(meta.point_values, ensure_ascii=False),
        },
        GRADING_PLACEHOLDERS,
    )
    parts: list = [TextPart(prompt)]
    if sample.subset == "multimodal":
        parts.extend(sample_image_parts(sample, corpus_root))
    message = ChatMessage(role="user", parts=tuple(parts))

    if cache is not None:
        cached = cache.get(template, prompt, client.model_id)
        if cached is not None:
            return _verdict_from_reply(cached, json.dumps(cached, ensure_ascii=False), meta)

    obj, raw = ask_with_json_repair(client, message, GRADE_SCHEMA, cfg.max_json_repair_retries)
    try:
        verdict = _verdict_from_reply(obj, raw, meta)
    except InconsistentVerdict as exc:
        nudge = INCONSISTENT_NUDGE.format(detail=exc)
        retry_message = ChatMessage(role="user", parts=(TextPart(prompt + "\n\n" + nudge),))
        obj, raw = ask_with_json_repair(client, retry_message, GRADE_SCHEMA, cfg.max_json_repair_retries)
        verdict = _verdict_from_reply(obj, raw, meta)

    if cache is not None:
        cache.put(template, prompt, client.model_id, obj)
    return verdict


def compute_ac(verdict: GradeVerdict) -> int:
    """Binary Answer Correctness: 1 only for a fully correct final answer."""
    return 1 if verdict.is_fully_correct else 0


def compute_ps(meta: SampleMeta, verdict: GradeVerdict, cfg: JudgeConfig) -> QuestionScore:
    """Process Score for one graded question.

    Fully correct forces (ac=1, ps=100). Otherwise the awarded point values
    are summed exactly: ps = alpha * awarded/total * 100. Raises
    ``MetaMismatch`` when the verdict awards ids the rubric does not define.
    """
    meta.validate()
    if verdict.is_fully_correct:
        if not verdict.all_awarded:
            raise InconsistentVerdict(f"{verdict.sample_id}: fully correct verdict without ALL sentinel")
        return QuestionScore(sample_id=verdict.sample_id, ac=1, ps=100.0)
    if verdict.all_awarded:
        raise InconsistentVerdict(f"{verdict.sample_id}: ALL sentinel on a not-fully-correct verdict")

    unknown = [p for p in verdict.awarded_points if p not in meta.point_values]
    if unknown:
        raise MetaMismatch(f"{verdict.sample_id}: awarded ids {unknown} not in rubric")

    total = sum(meta.point_values.values())
    hit = sum(meta.point_values[p] for p in verdict.awarded_points)
    alpha = Fraction(str(cfg.alpha))
    ps = float(alpha * Fraction(hit, total) * 100)
    return QuestionScore(sample_id=verdict.sample_id, ac=0, ps=ps)
