"""Pieces shared by the three SFT builders."""

from __future__ import annotations

import fnmatch
import hashlib
from dataclasses import dataclass, field
from typing import Iterable

from ..context import ContextBundle, ContextItem, ContextKind
from ..graph import CodeGraph, Entity, EntityKind, dependency_closure, enclosing_namespace

TYPE_WORDS = {
    EntityKind.FILE: "file",
    EntityKind.CLASS: "class",
    EntityKind.FUNCTION: "function",
    EntityKind.METHOD: "method",
    EntityKind.GLOBAL: "global variable",
}


def sample_id(*parts: object) -> str:
    return hashlib.sha256("\0".join(map(str, parts)).encode("utf-8")).hexdigest()[:16]


@dataclass
class TestMatcher:
    """Path and name heuristics that pick out test functions.

    A callable definition counts as a test when its short name matches one
    of ``name_patterns`` and its file path matches one of ``path_globs``
    (fnmatch semantics, ``*`` crosses directories).
    """

    path_globs: list[str] = field(default_factory=lambda: ["*tests/*", "*test/*", "*test_*", "*_test.*", "*_tests.*"])
    name_patterns: list[str] = field(default_factory=lambda: ["test_*", "test", "TEST_*", "Test*"])

    __test__ = False  # not a pytest class

    def is_test(self, ent: Entity) -> bool:
        if ent.kind not in (EntityKind.FUNCTION, EntityKind.METHOD) or ent.declaration:
            return False
        path_ok = any(fnmatch.fnmatchcase(ent.file_path, g) for g in self.path_globs)
        return path_ok and any(fnmatch.fnmatchcase(ent.short_name, p) for p in self.name_patterns)

    def tests(self, graph: CodeGraph) -> list[Entity]:
        found = [e for e in graph.entities.values() if self.is_test(e)]
        return sorted(found, key=lambda e: (e.file_path, e.span.start, e.name))


def closure_item(graph: CodeGraph, ent: Entity) -> ContextItem:
    ns = enclosing_namespace(graph, ent.id)
    where = f"{ent.file_path}:{ent.span.start}-{ent.span.end}"
    label = f"{TYPE_WORDS[ent.kind]} {ent.name} ({where}" + (f", namespace {ns})" if ns else ")")
    return ContextItem(label, ent.body_text, ent.id)


def closure_bundle(graph: CodeGraph, roots: Iterable[str], exclude: Iterable[str] = ()) -> ContextBundle:
    """Union of dependency closures of ``roots`` as closure-code context.

    Items are ordered by (file, line) so the bundle is deterministic.
    ``exclude`` drops entities (typically the source test itself).
    """
    skip = set(exclude)
    seen: dict[str, Entity] = {}
    for r in roots:
        for ent in dependency_closure(graph, r):
            if ent.id not in skip:
                seen[ent.id] = ent
    ordered = sorted(seen.values(), key=lambda e: (e.file_path, e.span.start, e.name, e.id))
    return ContextBundle(ContextKind.DEPENDENCY_CLOSURE_CODE, tuple(closure_item(graph, e) for e in ordered))
