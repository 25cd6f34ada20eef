"""Line-delimited graph export/import.

Layout (UTF-8, one JSON object per line, keys sorted)::

    {"format": "repocorpus-graph", "version": 1, "language": "cpp", "content_hash": "..."}
    {"record": "entity", "id": ..., "kind": ..., "name": ..., "file_path": ...,
     "span": [start, end], "body": ..., "signature": {"params": [...], "required": n,
     "variadic": bool} | null, "declaration": bool}
    {"record": "relation", "src": ..., "dst": ..., "kind": ..., "evidence": [path, line] | null}
    {"record": "diagnostic", "file": ..., "line": ..., "tag": ..., "message": ...}

``content_hash`` is sha256 (hex) over entities sorted by id, feeding
``id + b"\\0" + body + b"\\0"`` for each, bodies encoded as UTF-8.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import IO

from .model import (
    CodeGraph,
    Diagnostic,
    Entity,
    EntityKind,
    Evidence,
    GraphIntegrityError,
    Language,
    Relation,
    RelationKind,
    Signature,
    Span,
)

GRAPH_FORMAT = "repocorpus-graph"
GRAPH_VERSION = 1


def _dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def entity_to_record(ent: Entity) -> dict:
    sig = None
    if ent.signature is not None:
        sig = {
            "params": list(ent.signature.params),
            "required": ent.signature.required,
            "variadic": ent.signature.variadic,
        }
    return {
        "record": "entity",
        "id": ent.id,
        "kind": ent.kind.value,
        "name": ent.name,
        "file_path": ent.file_path,
        "span": [ent.span.start, ent.span.end],
        "body": ent.body_text,
        "signature": sig,
        "declaration": ent.declaration,
    }


def entity_from_record(rec: dict) -> Entity:
    sig = rec.get("signature")
    return Entity(
        id=rec["id"],
        kind=EntityKind(rec["kind"]),
        name=rec["name"],
        file_path=rec["file_path"],
        span=Span(*rec["span"]),
        body_text=rec.get("body", ""),
        signature=Signature(tuple(sig["params"]), sig["required"], sig["variadic"]) if sig else None,
        declaration=bool(rec.get("declaration", False)),
    )


def write_graph(graph: CodeGraph, fh: IO[str]) -> None:
    header = {
        "format": GRAPH_FORMAT,
        "version": GRAPH_VERSION,
        "language": graph.language.value,
        "content_hash": graph.content_hash,
    }
    fh.write(_dumps(header) + "\n")
    for eid in sorted(graph.entities):
        fh.write(_dumps(entity_to_record(graph.entities[eid])) + "\n")
    rels = sorted(
        graph.relations,
        key=lambda r: (r.kind.value, r.src, r.dst, r.evidence.file_path if r.evidence else "", r.evidence.line if r.evidence else 0),
    )
    for rel in rels:
        ev = [rel.evidence.file_path, rel.evidence.line] if rel.evidence else None
        fh.write(_dumps({"record": "relation", "src": rel.src, "dst": rel.dst, "kind": rel.kind.value, "evidence": ev}) + "\n")
    for diag in graph.diagnostics:
        fh.write(_dumps({"record": "diagnostic", **diag.to_record()}) + "\n")


def read_graph(fh: IO[str]) -> CodeGraph:
    first = fh.readline()
    if not first:
        raise GraphIntegrityError("empty graph file")
    header = json.loads(first)
    if header.get("format") != GRAPH_FORMAT:
        raise GraphIntegrityError(f"not a graph file (format={header.get('format')!r})")
    if header.get("version") != GRAPH_VERSION:
        raise GraphIntegrityError(f"unsupported graph version {header.get('version')}")
    graph = CodeGraph(language=Language(header["language"]))
    for lineno, line in enumerate(fh, start=2):
        if not line.strip():
            continue
        rec = json.loads(line)
        kind = rec.get("record")
        if kind == "entity":
            graph.add_entity(entity_from_record(rec))
        elif kind == "relation":
            ev = rec.get("evidence")
            graph.add_relation(
                Relation(rec["src"], rec["dst"], RelationKind(rec["kind"]), Evidence(ev[0], ev[1]) if ev else None)
            )
        elif kind == "diagnostic":
            graph.diagnostics.append(Diagnostic(rec["file"], rec["line"], rec["tag"], rec["message"]))
        else:
            raise GraphIntegrityError(f"line {lineno}: unknown record type {kind!r}")
    graph.check_integrity()
    if header.get("content_hash") and header["content_hash"] != graph.content_hash:
        raise GraphIntegrityError("content_hash mismatch; graph file was modified")
    return graph


def save_graph(graph: CodeGraph, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        write_graph(graph, fh)


def load_graph(path: str | Path) -> CodeGraph:
    with open(path, encoding="utf-8") as fh:
        return read_graph(fh)
