"""Segmentation of raw model output into typed reasoning segments.

Model output alternates prose with fenced plot-code blocks. The splitter
recognizes triple-backtick fences whose tag is in the configured set;
everything else stays prose. A prose line starting with the configured
answer delimiter turns the rest of that prose run into a final-answer
segment. An unterminated fence at end of output still yields a code segment
(flagged ``unterminated``), because streaming generations routinely stop
mid-fence at token limits.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

_FENCE_OPEN_RE = re.compile(r"^```([A-Za-z0-9_+-]+)\s*$")
_FENCE_CLOSE_RE = re.compile(r"^```\s*$")


@dataclass(frozen=True)
class Segment:
    kind: str  # "text" | "code" | "figure" | "final_answer"
    payload: str  # prose, code, or figure path
    origin: str  # "model" | "sandbox"
    index: int
    unterminated: bool = False

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "payload": self.payload,
            "origin": self.origin,
            "index": self.index,
            "unterminated": self.unterminated,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Segment":
        return cls(
            kind=str(obj["kind"]),
            payload=str(obj["payload"]),
            origin=str(obj["origin"]),
            index=int(obj["index"]),
            unterminated=bool(obj.get("unterminated", False)),
        )


def detect_segments(model_output: str, cfg) -> list[Segment]:
    """Split one model generation into text / code / final-answer segments.

    ``cfg`` needs ``code_fence_tags`` and ``answer_delimiter``. Whitespace-only
    prose runs are dropped; indices come out consecutive from 0.
    """
    segments: list[Segment] = []
    prose: list[str] = []
    code: list[str] = []
    in_code = False

    def flush_prose() -> None:
        if not prose:
            return
        run = "\n".join(prose).strip("\n")
        prose.clear()
        if not run.strip():
            return
        segments.extend(_split_answer(run, cfg.answer_delimiter, len(segments)))

    lines = model_output.split("\n")
    for line in lines:
        if in_code:
            if _FENCE_CLOSE_RE.match(line):
                in_code = False
                segments.append(Segment("code", "\n".join(code), "model", len(segments)))
                code.clear()
            else:
                code.append(line)
            continue
        open_match = _FENCE_OPEN_RE.match(line)
        if open_match and open_match.group(1) in cfg.code_fence_tags:
            flush_prose()
            in_code = True
            continue
        prose.append(line)

    if in_code:  # generation stopped mid-fence: keep the remainder as code
        segments.append(Segment("code", "\n".join(code), "model", len(segments), unterminated=True))
    else:
        flush_prose()

    return _reindex(segments)


def _split_answer(run: str, delimiter: str, base_index: int) -> list[Segment]:
    lines = run.split("\n")
    for i, line in enumerate(lines):
        if line.lstrip().startswith(delimiter):
            out = []
            before = "\n".join(lines[:i]).strip("\n")
            if before.strip():
                out.append(Segment("text", before, "model", base_index))
            answer = "\n".join(lines[i:]).strip("\n")
            out.append(Segment("final_answer", answer, "model", base_index + len(out)))
            return out
    return [Segment("text", run, "model", base_index)]


def _reindex(segments: list[Segment]) -> list[Segment]:
    return [replace(s, index=i) for i, s in enumerate(segments)]
