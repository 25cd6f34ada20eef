"""Repository scanning: source tree -> :class:`CodeGraph`."""

from __future__ import annotations

import logging
import os
import posixpath
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from ..graph.model import (
    CodeGraph,
    Diagnostic,
    Entity,
    EntityKind,
    Evidence,
    Language,
    Relation,
    RelationKind,
    Signature,
    Span,
    entity_id,
)
from .base import Backend, FrontendConfig, ParsedFile
from .cpp_backend import CppBackend
from .python_backend import PythonBackend, module_name
from .resolve import FileScope, _absolute_module, resolve_calls

log = logging.getLogger(__name__)


class ScanError(OSError):
    """The repository root cannot be scanned at all."""


def make_backend(cfg: FrontendConfig) -> Backend:
    if cfg.language == "cpp":
        return CppBackend()
    return PythonBackend(cfg.include_roots)


def discover_files(root: Path, cfg: FrontendConfig, suffixes: tuple[str, ...]) -> list[str]:
    """Repository-relative POSIX paths of matching source files, sorted."""
    found = []
    for dirpath, dirnames, filenames in os.walk(root, followlinks=cfg.follow_symlinks):
        dirnames[:] = sorted(d for d in dirnames if not d.startswith("."))
        rel_dir = Path(dirpath).relative_to(root).as_posix()
        for fn in filenames:
            if not fn.endswith(suffixes):
                continue
            full = Path(dirpath) / fn
            if full.is_symlink() and not cfg.follow_symlinks:
                continue
            rel = fn if rel_dir == "." else f"{rel_dir}/{fn}"
            if cfg.excluded(rel):
                continue
            found.append(rel)
    return sorted(found)


def _parse_all(root: Path, paths: list[str], cfg: FrontendConfig) -> list[ParsedFile]:
    local = threading.local()

    def work(rel: str) -> ParsedFile:
        backend = getattr(local, "backend", None)
        if backend is None:
            backend = local.backend = make_backend(cfg)
        text = (root / rel).read_text(encoding="utf-8", errors="replace")
        try:
            return backend.parse(rel, text)
        except Exception as exc:  # backend bug or pathological input: keep the file
            log.warning("parse failed for %s: %s", rel, exc)
            pf = ParsedFile(path=rel, text=text)
            pf.errors.append((0, f"parser failure: {exc}"))
            return pf

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(work, paths))
    return [work(p) for p in paths]


def _resolve_include(pf_path: str, target: str, system: bool, roots: list[str], known: set[str]) -> str | None:
    cands = []
    if not system:
        cands.append(posixpath.normpath(posixpath.join(posixpath.dirname(pf_path), target)))
    for r in roots:
        cands.append(posixpath.normpath(posixpath.join(r, target)))
    for c in cands:
        if c in known:
            return c
    return None


def _resolve_import(pf: ParsedFile, inc, modules: dict[str, str], roots: list[str]) -> list[str]:
    is_pkg = pf.path.endswith("__init__.py")
    own = module_name(pf.path, roots)
    base = _absolute_module(own, is_pkg, "." * inc.level + inc.target)
    hits = []
    if inc.names:
        for n in inc.names:
            sub = f"{base}.{n}" if base else n
            if sub in modules:
                hits.append(modules[sub])
            elif base in modules and modules[base] not in hits:
                hits.append(modules[base])
    elif base in modules:
        hits.append(modules[base])
    return hits


def _build(parsed: list[ParsedFile], cfg: FrontendConfig) -> tuple[CodeGraph, dict[str, FileScope]]:
    lang = Language(cfg.language)
    graph = CodeGraph(language=lang)
    known = {pf.path for pf in parsed}
    class_names = {d.name for pf in parsed for d in pf.defs if d.kind is EntityKind.CLASS}
    scopes: dict[str, FileScope] = {}

    for pf in parsed:
        nlines = max(1, len(pf.text.splitlines()))
        fid = entity_id(EntityKind.FILE, pf.path, pf.path)
        graph.add_entity(Entity(fid, EntityKind.FILE, pf.path, pf.path, Span(1, nlines), pf.text))
        for line, msg in pf.errors:
            graph.diagnostics.append(Diagnostic(pf.path, line, "parse-error", msg))
        seen: dict[tuple[EntityKind, str], int] = {}
        owners: list[str] = []
        for d in pf.defs:
            kind = d.kind
            if d.out_of_line and kind is EntityKind.FUNCTION and d.name.rsplit("::", 1)[0] in class_names:
                kind = EntityKind.METHOD
            ordinal = seen.get((kind, d.name), 0)
            seen[(kind, d.name)] = ordinal + 1
            eid = entity_id(kind, d.name, pf.path, ordinal)
            sig = d.signature if kind in (EntityKind.FUNCTION, EntityKind.METHOD) else None
            if kind in (EntityKind.FUNCTION, EntityKind.METHOD) and sig is None:
                sig = Signature((), 0)
            graph.add_entity(Entity(eid, kind, d.name, pf.path, Span(d.start, d.end), d.body, sig, d.declaration))
            owners.append(eid)
            parent = fid if d.parent is None else owners[d.parent]
            graph.add_relation(Relation(parent, eid, RelationKind.CONTAIN, Evidence(pf.path, d.start)))
        scopes[pf.path] = FileScope(pf.path, owners, set(), pf.aliases)

    modules = {}
    if lang is Language.PYTHON:
        for p in sorted(known):
            modules.setdefault(module_name(p, cfg.include_roots), p)
        for pf in parsed:
            scopes[pf.path].module = module_name(pf.path, cfg.include_roots)

    direct: dict[str, set[str]] = {p: set() for p in known}
    for pf in parsed:
        src = entity_id(EntityKind.FILE, pf.path, pf.path)
        added: set[str] = set()
        for inc in pf.includes:
            if lang is Language.CPP:
                hit = _resolve_include(pf.path, inc.target, inc.system, cfg.include_roots, known)
                targets = [hit] if hit else []
                kind = RelationKind.INCLUDE
            else:
                targets = _resolve_import(pf, inc, modules, cfg.include_roots)
                kind = RelationKind.DEPENDENCY
            for t in targets:
                if t == pf.path or t in added:
                    continue
                added.add(t)
                direct[pf.path].add(t)
                graph.add_relation(Relation(src, entity_id(EntityKind.FILE, t, t), kind, Evidence(pf.path, inc.line)))

    for p, scope in scopes.items():
        if lang is Language.CPP:
            # textual inclusion is transitive
            seen_files: set[str] = set()
            stack = list(direct[p])
            while stack:
                cur = stack.pop()
                if cur in seen_files or cur == p:
                    continue
                seen_files.add(cur)
                stack.extend(direct[cur])
            scope.visible_files = seen_files
        else:
            scope.visible_files = set(direct[p])
    return graph, scopes


def scan_repository(root: str | os.PathLike, cfg: FrontendConfig) -> CodeGraph:
    """Parse every matching source file under ``root`` into a code graph.

    Per-file parse failures are recorded as diagnostics and never abort the
    scan. The result is independent of ``cfg.workers``.
    """
    root = Path(root)
    if not root.is_dir() or not os.access(root, os.R_OK | os.X_OK):
        raise ScanError(f"repository root {root} is not a readable directory")
    backend_suffixes = CppBackend.suffixes if cfg.language == "cpp" else PythonBackend.suffixes
    paths = discover_files(root, cfg, backend_suffixes)
    parsed = _parse_all(root, paths, cfg)
    graph, scopes = _build(parsed, cfg)
    resolve_calls(graph, parsed, scopes)
    graph.check_integrity()
    return graph
