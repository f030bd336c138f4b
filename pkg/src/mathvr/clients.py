"""Chat clients for the model and judge endpoints.

One wire protocol covers both: an HTTP chat-completions endpoint taking an
ordered message list, where every message carries a role plus a content list
of parts (text, or inline base64 image with a media type), and replies carry
text plus token-usage counts. Endpoint URL, auth token and model id come from
configuration or the environment, never from code.

``PlaybackClient`` replays scripted replies for deterministic tests and
offline runs; ``RecordingClient`` wraps any client and keeps the exact
message sequences it was sent.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import httpx

from mathvr.errors import JudgeUnavailable, ModelUnavailable
from mathvr.tokens import DEFAULT_COUNTER


@dataclass(frozen=True)
class TextPart:
    text: str


@dataclass(frozen=True)
class ImagePart:
    media_type: str  # "image/png" | "image/jpeg"
    data_b64: str


Part = TextPart | ImagePart


@dataclass(frozen=True)
class ChatMessage:
    role: str  # "system" | "user" | "assistant"
    parts: tuple[Part, ...]

    @classmethod
    def text(cls, role: str, text: str) -> "ChatMessage":
        return cls(role=role, parts=(TextPart(text),))

    def text_content(self) -> str:
        return "\n".join(p.text for p in self.parts if isinstance(p, TextPart))


@dataclass(frozen=True)
class ChatReply:
    text: str
    input_tokens: int
    output_tokens: int


class ChatClient(Protocol):
    model_id: str

    def complete(self, messages: Sequence[ChatMessage], *, max_tokens: int | None = None) -> ChatReply:
        ...


class RateLimiter:
    """Caps in-flight requests across every client sharing this limiter."""

    def __init__(self, max_concurrent: int):
        self._sem = threading.BoundedSemaphore(max_concurrent)

    def __enter__(self) -> "RateLimiter":
        self._sem.acquire()
        return self

    def __exit__(self, *exc) -> None:
        self._sem.release()


_NO_LIMIT = RateLimiter(1 << 16)


def _wire_message(msg: ChatMessage) -> dict:
    content = []
    for part in msg.parts:
        if isinstance(part, TextPart):
            content.append({"type": "text", "text": part.text})
        else:
            content.append(
                {
                    "type": "image_url",
                    "image_url": {"url": f"data:{part.media_type};base64,{part.data_b64}"},
                }
            )
    return {"role": msg.role, "content": content}


class HttpChatClient:
    """OpenAI-compatible chat-completions client with bounded retries."""

    def __init__(
        self,
        endpoint: str,
        model_id: str,
        api_key: str = "",
        *,
        temperature: float = 0.0,
        timeout: float = 120.0,
        max_retries: int = 2,
        retry_backoff: float = 1.0,
        limiter: RateLimiter | None = None,
        error_cls: type[ModelUnavailable] = ModelUnavailable,
        transport: httpx.BaseTransport | None = None,
    ):
        self.endpoint = endpoint
        self.model_id = model_id
        self.temperature = temperature
        self.max_retries = max_retries
        self.retry_backoff = retry_backoff
        self._limiter = limiter or _NO_LIMIT
        self._error_cls = error_cls
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._http = httpx.Client(timeout=timeout, headers=headers, transport=transport)

    def complete(self, messages: Sequence[ChatMessage], *, max_tokens: int | None = None) -> ChatReply:
        payload: dict = {
            "model": self.model_id,
            "temperature": self.temperature,
            "messages": [_wire_message(m) for m in messages],
        }
        if max_tokens is not None:
            payload["max_tokens"] = max_tokens

        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            try:
                with self._limiter:
                    resp = self._http.post(self.endpoint, json=payload)
                if resp.status_code >= 500:
                    raise httpx.HTTPStatusError("server error", request=resp.request, response=resp)
                resp.raise_for_status()
                return self._parse(resp.json())
            except (httpx.TransportError, httpx.HTTPStatusError) as exc:
                last_error = exc
                if attempt < self.max_retries:
                    time.sleep(self.retry_backoff * (2**attempt))
        raise self._error_cls(f"{self.endpoint} failed after {self.max_retries + 1} attempts: {last_error}")

    @staticmethod
    def _parse(body: dict) -> ChatReply:
        try:
            message = body["choices"][0]["message"]
            content = message.get("content", "")
            if isinstance(content, list):  # providers may return structured parts
                content = "".join(p.get("text", "") for p in content if isinstance(p, dict))
            usage = body.get("usage", {})
            return ChatReply(
                text=content or "",
                input_tokens=int(usage.get("prompt_tokens", 0)),
                output_tokens=int(usage.get("completion_tokens", 0)),
            )
        except (KeyError, IndexError, TypeError) as exc:
            raise ModelUnavailable(f"malformed chat response: {exc}") from exc

    def close(self) -> None:
        self._http.close()


class HttpJudgeClient(HttpChatClient):
    """Same wire protocol, but failures surface as ``JudgeUnavailable``."""

    def __init__(self, endpoint: str, model_id: str, api_key: str = "", **kwargs):
        kwargs.setdefault("error_cls", JudgeUnavailable)
        super().__init__(endpoint, model_id, api_key, **kwargs)


@dataclass
class PlaybackClient:
    """Replays a fixed list of reply texts; deterministic and offline.

    Token usage is synthesized with the approximate counter so traces built
    on playback runs still carry plausible budgets.
    """

    replies: list[str]
    model_id: str = "playback"
    exhausted_error: type[Exception] = ModelUnavailable
    _cursor: int = field(default=0, init=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def complete(self, messages: Sequence[ChatMessage], *, max_tokens: int | None = None) -> ChatReply:
        with self._lock:
            if self._cursor >= len(self.replies):
                raise self.exhausted_error(f"playback script exhausted after {len(self.replies)} replies")
            text = self.replies[self._cursor]
            self._cursor += 1
        prompt_tokens = sum(DEFAULT_COUNTER.count(m.text_content()) for m in messages)
        return ChatReply(text=text, input_tokens=prompt_tokens, output_tokens=DEFAULT_COUNTER.count(text))


class RecordingClient:
    """Wraps a client and records every message sequence sent through it."""

    def __init__(self, inner: ChatClient):
        self.inner = inner
        self.calls: list[tuple[ChatMessage, ...]] = []

    @property
    def model_id(self) -> str:
        return self.inner.model_id

    def complete(self, messages: Sequence[ChatMessage], *, max_tokens: int | None = None) -> ChatReply:
        self.calls.append(tuple(messages))
        return self.inner.complete(messages, max_tokens=max_tokens)
