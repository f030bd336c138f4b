"""Rubric extraction: per-sample scoring points and answer summaries.

Stage one of the grading pipeline. The judge reads the ground-truth question
and solution and emits scoring points (critical solution steps), an integer
value per point, and a summary of the final answers. The result is the
grading rubric that stage two scores responses against.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

from mathvr.clients import ChatClient, ChatMessage, ImagePart, TextPart
from mathvr.corpus.model import Sample
from mathvr.errors import InvariantViolation, UnparseableVerdict
from mathvr.judge.config import JudgeConfig
from mathvr.judge.jsonparse import parse_judge_json
from mathvr.judge.prompts import META_PLACEHOLDERS, META_TEMPLATE, fill_template, load_template

JSON_ONLY_NUDGE = "Your previous reply could not be parsed. Reply with JSON only, in the exact format requested."

META_SCHEMA = {
    "type": "object",
    "required": ["scoring_points", "scores"],
    "properties": {
        "scoring_points": {"type": "object", "minProperties": 1},
        "scores": {"type": "object", "minProperties": 1},
        "total_answer": {"type": ["integer", "string"]},
        "answer_summary": {"type": "object"},
        "max_score": {"type": ["integer", "string"]},
    },
}


@dataclass
class SampleMeta:
    """Grading rubric for one sample: scoring points, values, answers."""

    sample_id: str
    scoring_points: dict[str, str]  # point_id -> description, insertion-ordered
    point_values: dict[str, int]  # point_id -> value >= 1
    total_answer: int
    answer_summary: dict[str, str]  # question key -> answer text
    max_score: int
    verified: bool = False

    def validate(self) -> None:
        """Raise ``InvariantViolation`` if the rubric contradicts itself."""
        if set(self.scoring_points) != set(self.point_values):
            raise InvariantViolation(
                f"{self.sample_id}: scoring_points keys {sorted(self.scoring_points)} "
                f"!= point_values keys {sorted(self.point_values)}"
            )
        if not self.scoring_points:
            raise InvariantViolation(f"{self.sample_id}: rubric has no scoring points")
        bad = {k: v for k, v in self.point_values.items() if not isinstance(v, int) or v < 1}
        if bad:
            raise InvariantViolation(f"{self.sample_id}: point values must be integers >= 1, got {bad}")
        total = sum(self.point_values.values())
        if self.max_score != total:
            raise InvariantViolation(
                f"{self.sample_id}: declared max_score {self.max_score} != sum of point values {total}"
            )
        if self.total_answer != len(self.answer_summary):
            raise InvariantViolation(
                f"{self.sample_id}: total_answer {self.total_answer} != {len(self.answer_summary)} summarized answers"
            )
        if self.total_answer < 1:
            raise InvariantViolation(f"{self.sample_id}: total_answer must be >= 1")

    def with_verified(self, flag: bool = True) -> "SampleMeta":
        return replace(self, verified=flag)

    def to_json(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "scoring_points": self.scoring_points,
            "point_values": self.point_values,
            "total_answer": self.total_answer,
            "answer_summary": self.answer_summary,
            "max_score": self.max_score,
            "verified": self.verified,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SampleMeta":
        return cls(
            sample_id=str(obj["sample_id"]),
            scoring_points=dict(obj["scoring_points"]),
            point_values={k: int(v) for k, v in obj["point_values"].items()},
            total_answer=int(obj["total_answer"]),
            answer_summary={str(k): str(v) for k, v in obj.get("answer_summary", {}).items()},
            max_score=int(obj["max_score"]),
            verified=bool(obj.get("verified", False)),
        )


def render_sample_text(sample: Sample) -> str:
    """The question/analysis/answer block substituted into judge prompts."""
    return f"Question:\n{sample.question_md}\n\nAnalysis:\n{sample.solution_md}"


def sample_image_parts(sample: Sample, root_dir=None, include_solution: bool = False) -> list[ImagePart]:
    """Inline base64 image parts for a sample's assets, if resolvable."""
    import base64
    from pathlib import Path

    if root_dir is None:
        return []
    parts = []
    assets = list(sample.question_images) + (list(sample.solution_images) if include_solution else [])
    for asset in assets:
        path = Path(root_dir) / asset.path
        if not path.is_file():
            continue
        media = "image/png" if path.suffix.lower() == ".png" else "image/jpeg"
        parts.append(ImagePart(media_type=media, data_b64=base64.b64encode(path.read_bytes()).decode("ascii")))
    return parts


def ask_with_json_repair(
    client: ChatClient,
    message: ChatMessage,
    schema: dict,
    max_retries: int,
) -> tuple[dict, str]:
    """Send, parse; on parse failure re-ask with a JSON-only nudge.

    Exactly ``max_retries`` re-asks happen before the last parse error
    propagates. Returns (parsed object, raw reply text).
    """
    messages = [message]
    last_exc: UnparseableVerdict | None = None
    for attempt in range(max_retries + 1):
        reply = client.complete(messages)
        try:
            return parse_judge_json(reply.text, schema), reply.text
        except UnparseableVerdict as exc:
            last_exc = exc
            messages = messages + [
                ChatMessage.text("assistant", reply.text),
                ChatMessage.text("user", JSON_ONLY_NUDGE),
            ]
    assert last_exc is not None
    raise last_exc


def _normalize_point_values(points: dict, scores: dict, sample_id: str) -> dict[str, int]:
    """Map the reply's score keys onto point ids.

    Replies key values either by the point ids themselves (``p1``...) or by a
    parallel ``s1``... sequence; both are accepted, anything else violates the
    rubric invariants.
    """
    point_ids = list(points)
    values: dict[str, int] = {}
    for key, raw in scores.items():
        try:
            value = int(raw)
        except (TypeError, ValueError) as exc:
            raise InvariantViolation(f"{sample_id}: non-integer point value {raw!r} for {key!r}") from exc
        if key in points:
            values[key] = value
        elif key.startswith("s") and "p" + key[1:] in points:
            values["p" + key[1:]] = value
        else:
            raise InvariantViolation(f"{sample_id}: score key {key!r} matches no scoring point {point_ids}")
    return values


def extract_meta(
    sample: Sample,
    client: ChatClient,
    cfg: JudgeConfig,
    *,
    corpus_root=None,
    cache=None,
) -> SampleMeta:
    """Run the rubric-extraction prompt for one sample.

    The prompt is the verbatim extraction template with only ``{idd}`` and
    ``{question}`` substituted; the sample's images ride along as separate
    image parts so the judge can see the figures the solution refers to.
    """
    template = load_template(META_TEMPLATE)
    prompt = fill_template(
        template,
        {"idd": sample.id, "question": render_sample_text(sample)},
        META_PLACEHOLDERS,
    )
    parts: list = [TextPart(prompt)]
    parts.extend(sample_image_parts(sample, corpus_root, include_solution=True))
    message = ChatMessage(role="user", parts=tuple(parts))

    if cache is not None:
        cached = cache.get(template, prompt, client.model_id)
        if cached is not None:
            return _meta_from_reply(cached, sample.id)

    obj, raw = ask_with_json_repair(client, message, META_SCHEMA, cfg.max_json_repair_retries)
    meta = _meta_from_reply(obj, sample.id)
    if cache is not None:
        cache.put(template, prompt, client.model_id, obj)
    return meta


def _meta_from_reply(obj: dict, sample_id: str) -> SampleMeta:
    points = {str(k): str(v) for k, v in obj["scoring_points"].items()}
    values = _normalize_point_values(points, obj["scores"], sample_id)
    answer_summary = {str(k): str(v) for k, v in obj.get("answer_summary", {}).items()}
    total_answer = int(obj.get("total_answer", len(answer_summary)))
    declared_max = obj.get("max_score")
    max_score = int(declared_max) if declared_max is not None else sum(values.values())
    meta = SampleMeta(
        sample_id=sample_id,
        scoring_points=points,
        point_values=values,
        total_answer=total_answer,
        answer_summary=answer_summary,
        max_score=max_score,
        verified=False,
    )
    meta.validate()
    return meta


class ReplyCache:
    """Content-addressed judge-reply cache: (template, filled prompt, model)."""

    def __init__(self, directory=None):
        from pathlib import Path

        self._mem: dict[str, dict] = {}
        self._dir = Path(directory) if directory is not None else None
        if self._dir is not None:
            self._dir.mkdir(parents=True, exist_ok=True)

    def _key(self, template: str, prompt: str, model_id: str) -> str:
        import hashlib

        h = hashlib.sha256()
        for chunk in (template, "\x00", prompt, "\x00", model_id):
            h.update(chunk.encode("utf-8"))
        return h.hexdigest()

    def get(self, template: str, prompt: str, model_id: str) -> dict | None:
        key = self._key(template, prompt, model_id)
        if key in self._mem:
            return self._mem[key]
        if self._dir is not None:
            path = self._dir / f"{key}.json"
            if path.is_file():
                obj = json.loads(path.read_text(encoding="utf-8"))
                self._mem[key] = obj
                return obj
        return None

    def put(self, template: str, prompt: str, model_id: str, obj: dict) -> None:
        key = self._key(template, prompt, model_id)
        self._mem[key] = obj
        if self._dir is not None:
            (self._dir / f"{key}.json").write_text(json.dumps(obj, ensure_ascii=False), encoding="utf-8")
