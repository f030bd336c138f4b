"""Pluggable text token counting.

Corpus statistics and cost accounting both need a token count for markdown
text and code. The exact tokenizer behind published corpus statistics is a
vendor detail, so the counter is an injectable interface; the default is a
documented approximation (unicode word runs plus isolated punctuation) that
is deterministic and dependency-free. Reproducing vendor-tokenizer numbers
requires plugging that vendor's tokenizer in here.
"""

from __future__ import annotations

import re
from typing import Protocol

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


class TokenCounter(Protocol):
    def count(self, text: str) -> int:
        """Number of tokens in ``text``."""
        ...


class ApproxTokenCounter:
    """Counts unicode word runs and isolated punctuation marks as tokens."""

    def count(self, text: str) -> int:
        return len(_TOKEN_RE.findall(text))


class FixedTokenCounter:
    """Test double: every string costs a fixed number of tokens."""

    def __init__(self, per_text: int):
        self.per_text = per_text

    def count(self, text: str) -> int:
        return self.per_text


DEFAULT_COUNTER = ApproxTokenCounter()
