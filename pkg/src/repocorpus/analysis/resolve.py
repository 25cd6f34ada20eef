"""Name-and-arity call resolution.

Each call site is looked up in three tiers: (a) the caller's own file,
(b) files it imports/includes (transitively for C++), (c) the whole graph,
where a match must be unique by qualified name and defining file. Within tiers (a) and (b)
every arity-compatible candidate receives an edge, so overload sets fan out.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

from ..builtins import is_builtin_call
from ..graph.model import (
    CodeGraph,
    Diagnostic,
    Entity,
    EntityKind,
    Evidence,
    Language,
    Relation,
    RelationKind,
)
from .base import CallSite, NameRef, ParsedFile
from .python_backend import module_name

CALL_TARGET_KINDS = frozenset({EntityKind.FUNCTION, EntityKind.METHOD, EntityKind.CLASS})
REF_TARGET_KINDS = frozenset({EntityKind.GLOBAL, EntityKind.CLASS})


@dataclass
class FileScope:
    """What one source file can see, plus its def-index -> entity-id map."""

    path: str
    owners: list[str]
    visible_files: set[str]
    aliases: dict[str, tuple[str, str]]
    module: str = ""


def _absolute_module(module: str, is_package: bool, target: str) -> str:
    """Resolve a possibly relative (leading dots) module name."""
    if not target.startswith("."):
        return target
    level = len(target) - len(target.lstrip("."))
    rest = target[level:]
    parts = module.split(".") if module else []
    if not is_package:
        parts = parts[:-1]
    if level > 1:
        parts = parts[: len(parts) - (level - 1)]
    base = ".".join(parts)
    if base and rest:
        return f"{base}.{rest}"
    return base or rest


class Resolver:
    def __init__(self, graph: CodeGraph, scopes: dict[str, FileScope]) -> None:
        self.graph = graph
        self.scopes = scopes
        self.lang = graph.language
        self.sep = "::" if self.lang is Language.CPP else "."
        self.by_name: dict[str, list[Entity]] = defaultdict(list)
        for ent in graph.entities.values():
            if ent.kind is not EntityKind.FILE:
                self.by_name[ent.short_name].append(ent)
        for lst in self.by_name.values():
            lst.sort(key=lambda e: (e.file_path, e.span.start, e.id))
        self.definitions: dict[str, list[Entity]] = defaultdict(list)
        for ent in graph.entities.values():
            if ent.kind in (EntityKind.FUNCTION, EntityKind.METHOD) and not ent.declaration:
                self.definitions[ent.name].append(ent)
        self._edges: dict[tuple[RelationKind, str, str], Evidence] = {}

    # -- helpers ------------------------------------------------------------

    def _scope_matches(self, ent: Entity, qualifier: tuple[str, ...]) -> bool:
        want = self.sep.join(qualifier)
        scope = ent.scope
        return scope == want or scope.endswith(self.sep + want)

    def _accepts(self, ent: Entity, nargs: int | None) -> bool:
        if nargs is None:
            return True
        if ent.signature is not None:
            return ent.signature.accepts(nargs)
        if ent.kind is EntityKind.CLASS:
            ctor_names = (f"{ent.name}{self.sep}{ent.short_name}", f"{ent.name}.__init__")
            ctors = [c for n in ctor_names for c in self.definitions.get(n, [])]
            ctors += [
                c
                for c in self.by_name.get(ent.short_name if self.lang is Language.CPP else "__init__", [])
                if c.kind is EntityKind.METHOD and c.scope == ent.name and c not in ctors
            ]
            if not ctors:
                return True
            return any(c.signature is not None and c.signature.accepts(nargs) for c in ctors)
        return True

    def _expand_alias(self, scope: FileScope, name: str, qualifier: tuple[str, ...]) -> tuple[str, tuple[str, ...]]:
        if self.lang is not Language.PYTHON:
            return name, qualifier
        is_pkg = scope.path.endswith("__init__.py")
        if not qualifier and name in scope.aliases:
            mod, orig = scope.aliases[name]
            if orig:
                absmod = _absolute_module(scope.module, is_pkg, mod)
                return orig, tuple(absmod.split(".")) if absmod else ()
            return name, qualifier
        if qualifier and qualifier[0] in scope.aliases:
            mod, orig = scope.aliases[qualifier[0]]
            absmod = _absolute_module(scope.module, is_pkg, mod)
            head = absmod.split(".") if absmod else []
            if orig:
                head.append(orig)
            return name, tuple(head) + qualifier[1:]
        return name, qualifier

    def _reexported(self, scope: FileScope, name: str, qualifier: tuple[str, ...]) -> bool:
        # `from pkg import Name` where pkg/__init__.py re-exports Name from a submodule
        return self.lang is Language.PYTHON and not qualifier and bool(scope.aliases.get(name, ("", ""))[1])

    def _tiers(self, scope: FileScope, cands: list[Entity]):
        same = [c for c in cands if c.file_path == scope.path]
        visible = [c for c in cands if c.file_path in scope.visible_files]
        return same, visible

    def _add(self, kind: RelationKind, src: str, dst: str, ev: Evidence) -> None:
        key = (kind, src, dst)
        prev = self._edges.get(key)
        if prev is None or ev.line < prev.line:
            self._edges[key] = ev

    def _with_definitions(self, targets: list[Entity]) -> list[Entity]:
        out = list(targets)
        for t in targets:
            if t.declaration:
                for d in self.definitions.get(t.name, []):
                    if d not in out and (d.signature is None or t.signature is None or d.signature.count == t.signature.count):
                        out.append(d)
        return out

    # -- calls ----------------------------------------------------------------

    def _call_candidates(self, scope: FileScope, owner: Entity, site: CallSite) -> tuple[list[Entity], bool]:
        """Returns (candidates, static) for one call site, before tiering."""
        name, qual = self._expand_alias(scope, site.name, site.qualifier)
        base = [e for e in self.by_name.get(name, []) if e.kind in CALL_TARGET_KINDS and e.id != owner.id]
        if site.receiver:
            return [e for e in base if e.kind is EntityKind.METHOD], False
        if qual:
            static = [e for e in base if self._scope_matches(e, qual)]
            if static:
                return static, True
            if self._reexported(scope, site.name, site.qualifier):
                return [e for e in base if e.kind is not EntityKind.METHOD], True
            # qualifier is an object (module-level instance etc.), not a scope
            return [e for e in base if e.kind is EntityKind.METHOD], False
        owner_class = owner.scope if owner.kind is EntityKind.METHOD else ""
        out = []
        for e in base:
            if e.kind is EntityKind.METHOD:
                if self.lang is Language.CPP and owner_class and e.scope == owner_class:
                    out.append(e)
            else:
                out.append(e)
        return out, True

    def resolve_call(self, scope: FileScope, site: CallSite) -> None:
        owner = self.graph[scope.owners[site.owner]]
        ev = Evidence(scope.path, site.line)
        cands, _ = self._call_candidates(scope, owner, site)
        cands = [c for c in cands if self._accepts(c, site.nargs)]
        same, visible = self._tiers(scope, cands)
        if site.receiver and site.qualifier and site.qualifier[0] in ("self", "this", "cls"):
            own = [c for c in same if c.scope == owner.scope or (owner.kind is EntityKind.CLASS and c.scope == owner.name)]
            same = own or same
        for tier in (same, visible):
            if tier:
                for t in self._with_definitions(tier):
                    self._add(RelationKind.CALL, owner.id, t.id, ev)
                return
        qualified = {c.name for c in cands}
        homes = {c.file_path for c in cands if not c.declaration}
        if len(qualified) == 1 and len(homes) <= 1:
            for t in self._with_definitions(cands):
                self._add(RelationKind.CALL, owner.id, t.id, ev)
            return
        sep = "::" if self.lang is Language.CPP and not site.receiver else "."
        display = sep.join(site.qualifier + (site.name,))
        if cands:
            where = sorted(qualified) if len(qualified) > 1 else sorted(homes)
            self.graph.diagnostics.append(
                Diagnostic(scope.path, site.line, "ambiguous", f"{display}: {len(where)} candidates ({', '.join(where)})")
            )
        elif is_builtin_call(self.lang.value, site.name, site.qualifier):
            self.graph.diagnostics.append(Diagnostic(scope.path, site.line, "builtin", display))
        else:
            self.graph.diagnostics.append(Diagnostic(scope.path, site.line, "unresolved", display))

    # -- references -------------------------------------------------------------

    def resolve_ref(self, scope: FileScope, ref: NameRef) -> None:
        owner_id = scope.owners[ref.owner]
        name, qual = self._expand_alias(scope, ref.name, ref.qualifier)
        cands = [
            e
            for e in self.by_name.get(name, [])
            if e.kind in REF_TARGET_KINDS and e.id != owner_id and (not qual or self._scope_matches(e, qual))
        ]
        if not cands and qual and self._reexported(scope, ref.name, ref.qualifier):
            cands = [e for e in self.by_name.get(name, []) if e.kind in REF_TARGET_KINDS and e.id != owner_id]
        if not cands:
            return
        same, visible = self._tiers(scope, cands)
        ev = Evidence(scope.path, ref.line)
        for tier in (same, visible):
            if tier:
                for t in tier:
                    self._add(RelationKind.REFERENCE, owner_id, t.id, ev)
                return
        if len({c.name for c in cands}) == 1 and len({c.file_path for c in cands}) == 1:
            for t in cands:
                self._add(RelationKind.REFERENCE, owner_id, t.id, ev)

    def edges(self) -> list[Relation]:
        return [
            Relation(src, dst, kind, ev)
            for (kind, src, dst), ev in sorted(self._edges.items(), key=lambda kv: (kv[0][0].value, kv[0][1], kv[0][2]))
        ]


def resolve_calls(graph: CodeGraph, parsed: list[ParsedFile], scopes: dict[str, FileScope]) -> CodeGraph:
    """Add call and reference edges for every call site / name use.

    Unresolvable calls become diagnostics tagged ``builtin``, ``ambiguous``
    or ``unresolved``; they never become edges.
    """
    resolver = Resolver(graph, scopes)
    for pf in parsed:
        scope = scopes[pf.path]
        for site in pf.calls:
            resolver.resolve_call(scope, site)
        for ref in pf.refs:
            resolver.resolve_ref(scope, ref)
    call_edges = resolver.edges()
    # a class used as a callee is not also recorded as a plain reference
    called = {(r.src, r.dst) for r in call_edges if r.kind is RelationKind.CALL}
    for rel in call_edges:
        if rel.kind is RelationKind.REFERENCE and (rel.src, rel.dst) in called:
            continue
        graph.add_relation(rel)
    return graph


def python_module_for(path: str, include_roots: list[str]) -> str:
    return module_name(path, include_roots)
