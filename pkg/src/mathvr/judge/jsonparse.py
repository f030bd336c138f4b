"""Tolerant extraction of the JSON object embedded in a judge reply.

Judges are asked for strict JSON but routinely wrap it in prose or markdown
fences. The rule here: return the first brace-balanced object in the reply
that parses and (when given) validates against the caller's schema; anything
else is an ``UnparseableVerdict``.
"""

from __future__ import annotations

import json
from typing import Any

import jsonschema

from mathvr.errors import UnparseableVerdict

_decoder = json.JSONDecoder()


def parse_judge_json(reply: str, schema: dict[str, Any] | None = None) -> dict[str, Any]:
    if not isinstance(reply, str) or "{" not in reply:
        raise UnparseableVerdict("reply contains no JSON object")

    errors: list[str] = []
    idx = reply.find("{")
    while idx != -1:
        try:
            obj, _ = _decoder.raw_decode(reply, idx)
        except json.JSONDecodeError:
            idx = reply.find("{", idx + 1)
            continue
        if isinstance(obj, dict):
            if schema is None:
                return obj
            try:
                jsonschema.validate(obj, schema)
                return obj
            except jsonschema.ValidationError as exc:
                errors.append(exc.message)
        idx = reply.find("{", idx + 1)

    detail = f"; schema errors: {errors[:3]}" if errors else ""
    raise UnparseableVerdict(f"no schema-valid JSON object in reply{detail}")
