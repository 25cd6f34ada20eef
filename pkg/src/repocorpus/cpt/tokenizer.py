"""Token counting for context-budget decisions."""

from __future__ import annotations

import math
from typing import Protocol


class Tokenizer(Protocol):
    def count(self, text: str) -> int: ...

    def truncate(self, text: str, limit: int) -> str: ...


class ByteQuarterTokenizer:
    """Approximate tokens as ``ceil(utf8_bytes / 4)``.

    Counting is subadditive over concatenation, so a window whose per-file
    counts sum to at most L also counts at most L once joined.
    """

    bytes_per_token = 4

    def count(self, text: str) -> int:
        return math.ceil(len(text.encode("utf-8")) / self.bytes_per_token)

    def truncate(self, text: str, limit: int) -> str:
        raw = text.encode("utf-8")[: limit * self.bytes_per_token]
        return raw.decode("utf-8", errors="ignore")
