"""Runner wire protocol: length-prefixed UTF-8 JSON frames.

Each frame is a 4-byte big-endian unsigned length followed by that many
bytes of UTF-8 JSON. The stream carries exactly one reply frame per request
frame; a runner announces itself with ``{"ready": true, "dialect": ...}``
before serving.

Frame shapes:
    request: {"id": str, "code": str, "timeout_ms": int, "figure_dir": str}
    reply:   {"id": str, "status": "ok"|"error"|"timeout", "figures": [str],
              "stdout": str, "stderr": str, "duration_ms": int}
"""

from __future__ import annotations

import json
import struct
from typing import BinaryIO

_HEADER = struct.Struct(">I")
MAX_FRAME_BYTES = 64 * 1024 * 1024


class FrameError(ValueError):
    """The byte stream does not contain a well-formed frame."""


def write_frame(stream: BinaryIO, obj: dict) -> None:
    payload = json.dumps(obj, ensure_ascii=False).encode("utf-8")
    stream.write(_HEADER.pack(len(payload)))
    stream.write(payload)
    stream.flush()


def read_frame(stream: BinaryIO) -> dict | None:
    """Next frame from the stream, or None on clean EOF."""
    header = _read_exact(stream, _HEADER.size)
    if header is None:
        return None
    (length,) = _HEADER.unpack(header)
    if length > MAX_FRAME_BYTES:
        raise FrameError(f"frame of {length} bytes exceeds limit")
    payload = _read_exact(stream, length)
    if payload is None and length > 0:
        raise FrameError("stream ended mid-frame")
    try:
        obj = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FrameError(f"frame payload is not UTF-8 JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise FrameError("frame payload must be a JSON object")
    return obj


def _read_exact(stream: BinaryIO, n: int) -> bytes | None:
    buf = b""
    while len(buf) < n:
        chunk = stream.read(n - len(buf))
        if not chunk:
            if not buf:
                return None
            raise FrameError("stream ended mid-frame")
        buf += chunk
    return buf
