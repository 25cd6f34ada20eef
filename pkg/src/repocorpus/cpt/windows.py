"""Sliding-window sample generation over one DFS path."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from ..graph.queries import DagNode
from .tokenizer import ByteQuarterTokenizer, Tokenizer


class PointerMode(str, Enum):
    OVERLAP_ONE = "overlap_one"
    STEP_ONE = "step_one"


@dataclass
class CptConfig:
    context_limit: int = 32768
    max_paths_per_root: int = 1000
    emit_tail_window: bool = True
    pointer_mode: PointerMode = PointerMode.OVERLAP_ONE
    general_mix_ratio: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        self.pointer_mode = PointerMode(self.pointer_mode)
        if self.context_limit <= 0:
            raise ValueError("context_limit must be positive")
        if self.max_paths_per_root < 1:
            raise ValueError("max_paths_per_root must be >= 1")
        if not 0 <= self.general_mix_ratio < 1:
            raise ValueError("general_mix_ratio must be in [0, 1)")


@dataclass(frozen=True)
class Window:
    """Half-open index range ``[start, stop)`` into a path."""

    start: int
    stop: int
    truncated: bool = False


def plan_windows(
    sizes: Sequence[int],
    limit: int,
    mode: PointerMode | str = PointerMode.OVERLAP_ONE,
    tail: bool = True,
) -> list[Window]:
    """Left/right pointer sweep over per-file sizes.

    The right pointer grows until the window ``[l..r]`` exceeds ``limit``;
    then ``[l..r-1]`` is emitted. In ``overlap_one`` mode the next window
    starts at the emitted window's last file; in ``step_one`` mode the left
    pointer advances by one. When the emitted window is a single file the
    overlap step would not advance, so ``l`` moves to ``r`` instead. A lone
    file larger than ``limit`` is emitted as a truncated window of one.
    ``tail`` emits the final window that reaches the end of the path.
    """
    mode = PointerMode(mode)
    n = len(sizes)
    out: list[Window] = []
    l = r = 0
    total = 0  # sum(sizes[l..r-1]); r is the next file to try adding
    while r < n:
        if total + sizes[r] <= limit:
            total += sizes[r]
            r += 1
            continue
        if r == l:
            out.append(Window(l, l + 1, truncated=True))
            l = r = l + 1
            total = 0
            continue
        out.append(Window(l, r))
        if mode is PointerMode.OVERLAP_ONE:
            l = r - 1 if r - 1 > l else r
        else:
            l += 1
        r = l
        total = 0
    if tail and l < n:
        out.append(Window(l, n))
    return out


def comment_prefix(language: str) -> str:
    return "//" if language == "cpp" else "#"


def node_text(node: DagNode, language: str) -> str:
    """Member files of a DAG node, each preceded by a one-line path comment."""
    prefix = comment_prefix(language)
    parts = []
    for path, text in zip(node.members, node.texts):
        body = text if text.endswith("\n") or not text else text + "\n"
        parts.append(f"{prefix} file: {path}\n{body}")
    return "".join(parts)


@dataclass(frozen=True)
class CptSample:
    id: str
    file_sequence: tuple[str, ...]
    text: str
    token_count: int
    truncated: bool

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "file_sequence": list(self.file_sequence),
            "text": self.text,
            "token_count": self.token_count,
            "truncated": self.truncated,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "CptSample":
        return cls(rec["id"], tuple(rec["file_sequence"]), rec["text"], rec["token_count"], rec["truncated"])


def sequence_digest(file_sequence: Sequence[str]) -> str:
    return hashlib.sha256("\n".join(file_sequence).encode("utf-8")).hexdigest()[:16]


def generate_windows(
    path: Sequence[DagNode],
    sizes: Sequence[int],
    cfg: CptConfig,
    language: str = "cpp",
    tokenizer: Tokenizer | None = None,
) -> list[CptSample]:
    if len(path) != len(sizes):
        raise ValueError("sizes must align with path")
    tok = tokenizer or ByteQuarterTokenizer()
    samples = []
    for w in plan_windows(sizes, cfg.context_limit, cfg.pointer_mode, cfg.emit_tail_window):
        nodes = path[w.start : w.stop]
        text = "".join(node_text(n, language) for n in nodes)
        if w.truncated:
            text = tok.truncate(text, cfg.context_limit)
        seq = tuple(m for n in nodes for m in n.members)
        samples.append(CptSample(sequence_digest(seq), seq, text, tok.count(text), w.truncated))
    return samples
