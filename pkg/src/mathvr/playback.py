"""File-driven playback clients for offline, reproducible pipeline runs.

Model playback file (JSON): {"scripts": {"<sample_id>": ["reply", ...]},
"default": ["reply", ...]}. Judge playback file: {"meta": {"<sample_id>":
{...}}, "grade": {"<sample_id>": {...}}}; replies are returned as JSON text.
The judge client recovers the sample id and stage from the filled prompt
itself, so it honors the exact same call surface as a live judge.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Sequence

from mathvr.clients import ChatMessage, ChatReply, PlaybackClient
from mathvr.errors import ModelUnavailable
from mathvr.tokens import DEFAULT_COUNTER

_META_ID_RE = re.compile(r"with the ID: (.+?)\.\n")
_GRADE_ID_RE = re.compile(r"^'id':(.+?),$", re.MULTILINE)


class ScriptedModel:
    """Per-sample playback scripts behind the chat client interface."""

    def __init__(self, scripts: dict[str, list[str]], default: list[str] | None = None, model_id: str = "playback"):
        self.model_id = model_id
        self._clients = {sid: PlaybackClient(replies, model_id=model_id) for sid, replies in scripts.items()}
        self._default_script = default or []
        self._default_clients: dict[str, PlaybackClient] = {}

    @classmethod
    def from_file(cls, path: Path) -> "ScriptedModel":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            scripts={str(k): list(v) for k, v in obj.get("scripts", {}).items()},
            default=list(obj.get("default", [])),
            model_id=str(obj.get("model_id", "playback")),
        )

    def for_sample(self, sample_id: str) -> PlaybackClient:
        if sample_id in self._clients:
            return self._clients[sample_id]
        if not self._default_script:
            raise ModelUnavailable(f"no playback script for sample {sample_id!r} and no default")
        if sample_id not in self._default_clients:
            self._default_clients[sample_id] = PlaybackClient(list(self._default_script), model_id=self.model_id)
        return self._default_clients[sample_id]


class ScriptedJudge:
    """Judge playback keyed by (stage, sample id) recovered from the prompt.

    Curation-stage prompts (image labeling, markdown standardization, quality
    checks, knowledge tagging) carry no stable id marker, so those replies
    come from the ordered ``curation`` list instead, consumed FIFO.
    """

    def __init__(
        self,
        meta: dict[str, dict],
        grade: dict[str, dict],
        curation: list[dict] | None = None,
        model_id: str = "playback-judge",
    ):
        self.model_id = model_id
        self._meta = meta
        self._grade = grade
        self._curation = list(curation or [])

    @classmethod
    def from_file(cls, path: Path) -> "ScriptedJudge":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            meta={str(k): v for k, v in obj.get("meta", {}).items()},
            grade={str(k): v for k, v in obj.get("grade", {}).items()},
            curation=list(obj.get("curation", [])),
            model_id=str(obj.get("model_id", "playback-judge")),
        )

    def complete(self, messages: Sequence[ChatMessage], *, max_tokens: int | None = None) -> ChatReply:
        prompt = messages[-1].text_content()
        meta_match = _META_ID_RE.search(prompt)
        grade_match = _GRADE_ID_RE.search(prompt)
        if meta_match and meta_match.group(1) in self._meta:
            obj = self._meta[meta_match.group(1)]
        elif grade_match and grade_match.group(1) in self._grade:
            obj = self._grade[grade_match.group(1)]
        elif self._curation:
            obj = self._curation.pop(0)
        else:
            raise ModelUnavailable("no scripted judge reply matches this prompt")
        text = json.dumps(obj, ensure_ascii=False)
        return ChatReply(text=text, input_tokens=DEFAULT_COUNTER.count(prompt), output_tokens=DEFAULT_COUNTER.count(text))
