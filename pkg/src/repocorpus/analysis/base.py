"""Backend-neutral parse results.

A backend turns one source file into a :class:`ParsedFile`; the scanner
merges parsed files into a graph and the resolver turns call sites and name
references into edges.
"""

from __future__ import annotations

import fnmatch
from dataclasses import dataclass, field
from typing import Protocol

from ..graph.model import EntityKind, Signature


@dataclass
class Def:
    kind: EntityKind
    name: str
    parent: int | None  # index of the enclosing Def, None = the file
    start: int
    end: int
    body: str
    signature: Signature | None = None
    declaration: bool = False
    # C++ ``int Foo::bar()`` defined outside the class; kind is settled by the
    # scanner once all classes are known
    out_of_line: bool = False


@dataclass
class IncludeRef:
    target: str
    line: int
    system: bool = False
    level: int = 0  # python relative-import level
    names: tuple[str, ...] = ()


@dataclass
class CallSite:
    owner: int
    name: str
    qualifier: tuple[str, ...]
    nargs: int | None
    line: int
    receiver: bool = False  # called on an object (obj.f / p->f / self.f)


@dataclass
class NameRef:
    owner: int
    name: str
    qualifier: tuple[str, ...]
    line: int


@dataclass
class ParsedFile:
    path: str
    text: str
    defs: list[Def] = field(default_factory=list)
    includes: list[IncludeRef] = field(default_factory=list)
    calls: list[CallSite] = field(default_factory=list)
    refs: list[NameRef] = field(default_factory=list)
    # python: local alias -> (module, original name or "" for a module alias)
    aliases: dict[str, tuple[str, str]] = field(default_factory=dict)
    errors: list[tuple[int, str]] = field(default_factory=list)


class Backend(Protocol):
    suffixes: tuple[str, ...]

    def parse(self, path: str, text: str) -> ParsedFile: ...


@dataclass
class FrontendConfig:
    language: str
    include_roots: list[str] = field(default_factory=lambda: ["."])
    exclude_globs: list[str] = field(default_factory=list)
    follow_symlinks: bool = False
    workers: int = 1

    def __post_init__(self) -> None:
        if self.language not in ("cpp", "python"):
            raise ValueError(f"unsupported language {self.language!r}")
        if not self.include_roots:
            raise ValueError("include_roots must be non-empty")
        for pat in self.exclude_globs:
            if not isinstance(pat, str) or not pat:
                raise ValueError(f"invalid exclude glob {pat!r}")
            try:
                fnmatch.translate(pat)
            except Exception as exc:  # pragma: no cover - translate rarely fails
                raise ValueError(f"invalid exclude glob {pat!r}: {exc}") from exc

    def excluded(self, rel_path: str) -> bool:
        return any(fnmatch.fnmatch(rel_path, pat) for pat in self.exclude_globs)
