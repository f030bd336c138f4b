"""The code-driven reasoning loop.

One problem runs as an isolated session: call the chat model, split its
output into segments, execute the first plot-code block in the sandbox,
append the rendered figures (or the error text) to the conversation, and
repeat until a final answer appears or a budget runs out. Every message list
sent to the model replays the full trace so far, with figures attached as
inline images padded to the configured square size.

Budgets and bounds:
  * at most ``max_code_rounds`` first-attempt executions;
  * a failed block grants ``repair_attempts_per_block`` extra executions
    that do not consume rounds, so total sandbox calls are bounded by
    rounds x (1 + repairs);
  * ``max_output_tokens`` caps the summed completion usage.

Sandbox failures never abort a session: errors become injected text and the
loop keeps going, so an all-errors sandbox still yields a complete
(truncated) trace.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from pathlib import Path

from mathvr.clients import ChatClient, ChatMessage, ImagePart, TextPart
from mathvr.corpus.model import Sample
from mathvr.orchestrator.figures import figure_part_b64, image_file_b64
from mathvr.orchestrator.segments import Segment, detect_segments
from mathvr.sandbox.pool import ExecRequest, ExecResult, RunnerPool
from mathvr.tokens import DEFAULT_COUNTER

DEFAULT_SYSTEM_PROMPT = (
    "You are a careful mathematician. Solve the problem step by step. "
    "Whenever a figure would help (auxiliary lines, function plots, geometric configurations), "
    "emit a fenced ```python code block that draws it with matplotlib; the rendered figure will "
    "be returned to you before you continue. Finish with a line starting with \"Answer:\" "
    "giving the final answer."
)


@dataclass
class OrchestratorConfig:
    max_code_rounds: int = 8
    per_exec_timeout: float = 20.0
    max_output_tokens: int = 8192
    figure_size: int = 448  # re-injection canvas, padded square
    repair_attempts_per_block: int = 1
    code_fence_tags: frozenset[str] = frozenset({"python", "plot"})
    answer_delimiter: str = "Answer:"
    system_prompt: str | None = DEFAULT_SYSTEM_PROMPT
    dialect: str = "python"
    deterministic_timing: bool = False  # zero out wall times for byte-stable traces

    def __post_init__(self) -> None:
        if self.max_code_rounds < 0:
            raise ValueError("max_code_rounds must be >= 0")
        if self.repair_attempts_per_block < 0:
            raise ValueError("repair_attempts_per_block must be >= 0")
        self.code_fence_tags = frozenset(self.code_fence_tags)


@dataclass(frozen=True)
class TokenUsage:
    text_tokens: int
    code_tokens: int
    figures: int

    def to_json(self) -> dict:
        return {"text_tokens": self.text_tokens, "code_tokens": self.code_tokens, "figures": self.figures}

    @classmethod
    def from_json(cls, obj: dict) -> "TokenUsage":
        return cls(int(obj["text_tokens"]), int(obj["code_tokens"]), int(obj["figures"]))


@dataclass
class ReasoningTrace:
    """Persisted record of one session: interleaved segments plus exec data."""

    sample_id: str
    segments: list[Segment]
    exec_results: list[ExecResult]
    truncated: bool
    model_id: str
    wall_time: float
    token_usage: TokenUsage

    def code_segments(self) -> list[Segment]:
        return [s for s in self.segments if s.kind == "code"]

    def final_answer(self) -> str | None:
        for s in self.segments:
            if s.kind == "final_answer":
                return s.payload
        return None

    def rendered_response(self) -> str:
        """The model's solution as judge-ready markdown.

        Code blocks are re-fenced; figures appear as placeholders so the
        grader can follow where visual steps happened.
        """
        parts: list[str] = []
        for s in self.segments:
            if s.kind == "code":
                parts.append(f"```python\n{s.payload}\n```")
            elif s.kind == "figure":
                parts.append(f"![figure]({s.payload})")
            else:
                parts.append(s.payload)
        return "\n\n".join(parts)

    def validate(self) -> list[str]:
        """Invariant check; returns human-readable problems (empty = ok)."""
        problems: list[str] = []
        for i, s in enumerate(self.segments):
            if s.index != i:
                problems.append(f"segment {i} carries index {s.index}")
            if s.kind == "figure" and s.origin != "sandbox":
                problems.append(f"figure segment {i} has origin {s.origin}")
            if s.kind in ("code", "final_answer") and s.origin != "model":
                problems.append(f"{s.kind} segment {i} has origin {s.origin}")

        code_count = len(self.code_segments())
        if code_count != len(self.exec_results):
            problems.append(f"{code_count} code segments vs {len(self.exec_results)} exec results")

        # figures must trail their producing code segment, consecutively
        block = -1
        remaining = 0
        for s in self.segments:
            if s.kind == "figure":
                if remaining <= 0:
                    problems.append(f"figure segment {s.index} does not trail its producing code block")
                else:
                    remaining -= 1
                continue
            if remaining > 0:
                problems.append(f"code block {block} is missing {remaining} adjacent figure segments")
            remaining = 0
            if s.kind == "code":
                block += 1
                if block < len(self.exec_results):
                    remaining = len(self.exec_results[block].figures)
        if remaining > 0:
            problems.append(f"code block {block} is missing {remaining} adjacent figure segments")

        total_figures = sum(1 for s in self.segments if s.kind == "figure")
        produced = sum(len(r.figures) for r in self.exec_results if r.status == "ok")
        if total_figures != produced:
            problems.append(f"{total_figures} figure segments vs {produced} produced figures")
        if self.token_usage.figures != total_figures:
            problems.append("token_usage.figures disagrees with figure segment count")
        has_answer = any(s.kind == "final_answer" for s in self.segments)
        if self.truncated == has_answer:
            problems.append(f"truncated={self.truncated} but final answer present={has_answer}")
        return problems

    def to_json(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "model_id": self.model_id,
            "truncated": self.truncated,
            "wall_time": self.wall_time,
            "token_usage": self.token_usage.to_json(),
            "segments": [s.to_json() for s in self.segments],
            "exec_results": [r.to_json() for r in self.exec_results],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ReasoningTrace":
        return cls(
            sample_id=str(obj["sample_id"]),
            segments=[Segment.from_json(s) for s in obj["segments"]],
            exec_results=[ExecResult.from_json(r) for r in obj["exec_results"]],
            truncated=bool(obj["truncated"]),
            model_id=str(obj["model_id"]),
            wall_time=float(obj["wall_time"]),
            token_usage=TokenUsage.from_json(obj["token_usage"]),
        )


def build_messages(
    sample: Sample,
    segments: list[Segment],
    cfg: OrchestratorConfig,
    figure_root: Path,
    corpus_root: Path | None = None,
) -> list[ChatMessage]:
    """Reconstruct the full conversation for the next model call.

    Every prior segment appears in trace order: model-origin runs collapse
    into assistant messages (code re-fenced), sandbox-origin runs become user
    messages with figures attached as padded inline images.
    """
    messages: list[ChatMessage] = []
    if cfg.system_prompt:
        messages.append(ChatMessage.text("system", cfg.system_prompt))

    question_parts: list = [TextPart(sample.question_md)]
    if corpus_root is not None:
        for asset in sample.question_images:
            path = Path(corpus_root) / asset.path
            if path.is_file():
                media, data = image_file_b64(path)
                question_parts.append(ImagePart(media_type=media, data_b64=data))
    messages.append(ChatMessage(role="user", parts=tuple(question_parts)))

    i = 0
    while i < len(segments):
        origin = segments[i].origin
        group = []
        while i < len(segments) and segments[i].origin == origin:
            group.append(segments[i])
            i += 1
        if origin == "model":
            rendered = []
            for s in group:
                if s.kind == "code":
                    rendered.append(f"```python\n{s.payload}\n```")
                else:
                    rendered.append(s.payload)
            messages.append(ChatMessage.text("assistant", "\n".join(rendered)))
        else:
            parts: list = []
            for s in group:
                if s.kind == "figure":
                    parts.append(
                        ImagePart(
                            media_type="image/png",
                            data_b64=figure_part_b64(figure_root / s.payload, cfg.figure_size),
                        )
                    )
                else:
                    parts.append(TextPart(s.payload))
            messages.append(ChatMessage(role="user", parts=tuple(parts)))
    return messages


def _split_first_code(parsed: list[Segment]) -> tuple[list[Segment], Segment | None]:
    for i, s in enumerate(parsed):
        if s.kind == "code":
            return parsed[:i], s
    return parsed, None


def run_problem(
    sample: Sample,
    model: ChatClient,
    sandbox: RunnerPool,
    cfg: OrchestratorConfig,
    *,
    figure_root: Path,
    corpus_root: Path | None = None,
) -> ReasoningTrace:
    """Drive one problem through the reasoning loop; returns a valid trace.

    Figure files land under ``figure_root/<sample_id>/block_<k>/`` and are
    referenced by path relative to ``figure_root``.
    """
    # runners reply with resolved absolute figure paths; resolve our side too
    # so relativization works for caller-supplied relative roots
    figure_root = Path(figure_root).resolve()
    started = time.monotonic()

    segments: list[Segment] = []
    exec_results: list[ExecResult] = []
    rounds = 0
    repairs_left = 0
    used_tokens = 0
    truncated = False

    def append(kind: str, payload: str, origin: str, unterminated: bool = False) -> None:
        segments.append(Segment(kind, payload, origin, len(segments), unterminated))

    def has_answer() -> bool:
        return any(s.kind == "final_answer" for s in segments)

    while True:
        if has_answer():
            break
        if used_tokens >= cfg.max_output_tokens:
            truncated = True
            break

        messages = build_messages(sample, segments, cfg, figure_root, corpus_root)
        reply = model.complete(messages, max_tokens=cfg.max_output_tokens - used_tokens)
        used_tokens += max(reply.output_tokens, 1)

        parsed = detect_segments(reply.text, cfg)
        pre, code_seg = _split_first_code(parsed)
        for s in pre:
            append(s.kind, s.payload, "model")

        if code_seg is None:
            if has_answer():
                break
            # generation ended without code: last prose becomes the answer
            if segments and segments[-1].kind == "text" and segments[-1].origin == "model":
                last = segments[-1]
                segments[-1] = replace(last, kind="final_answer")
                break
            truncated = True  # empty or non-committal generation
            break

        is_repair = repairs_left > 0
        if not is_repair:
            if rounds >= cfg.max_code_rounds:
                truncated = True
                break
            rounds += 1
        else:
            repairs_left -= 1

        block_dir = figure_root / sample.id / f"block_{len(exec_results):03d}"
        result = sandbox.execute(
            ExecRequest(
                code=code_seg.payload,
                figure_dir=block_dir,
                timeout=cfg.per_exec_timeout,
                dialect=cfg.dialect,
            )
        )
        if cfg.deterministic_timing:
            result = ExecResult(
                status=result.status,
                figures=result.figures,
                stdout=result.stdout,
                stderr=result.stderr,
                duration=0.0,
            )
        append("code", code_seg.payload, "model", code_seg.unterminated)
        exec_results.append(result)

        if result.status == "ok":
            repairs_left = 0
            rel_figures = []
            for fig in result.figures:
                rel_figures.append(Path(fig).relative_to(figure_root).as_posix())
            result.figures[:] = rel_figures
            for rel in rel_figures:
                append("figure", rel, "sandbox")
            if not rel_figures and result.stdout.strip():
                append("text", result.stdout.strip(), "sandbox")
        else:
            error_text = result.stderr.strip() or f"execution failed with status {result.status}"
            append("text", error_text, "sandbox")
            if not is_repair:
                repairs_left = cfg.repair_attempts_per_block

    text_tokens = sum(
        DEFAULT_COUNTER.count(s.payload)
        for s in segments
        if s.kind in ("text", "final_answer") and s.origin == "model"
    )
    code_tokens = sum(DEFAULT_COUNTER.count(s.payload) for s in segments if s.kind == "code")
    figures = sum(1 for s in segments if s.kind == "figure")

    trace = ReasoningTrace(
        sample_id=sample.id,
        segments=segments,
        exec_results=exec_results,
        truncated=truncated,
        model_id=model.model_id,
        wall_time=0.0 if cfg.deterministic_timing else time.monotonic() - started,
        token_usage=TokenUsage(text_tokens, code_tokens, figures),
    )
    return trace
