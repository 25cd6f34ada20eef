"""Code graph data model.

Entities (files, classes, functions, methods, global variables) and the typed
relations between them. A :class:`CodeGraph` is built once by a frontend and
treated as immutable afterwards; every query in :mod:`repocorpus.graph.queries`
only reads it.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator


class EntityKind(str, Enum):
    FILE = "file"
    CLASS = "class"
    FUNCTION = "function"
    METHOD = "method"
    GLOBAL = "global-variable"


class RelationKind(str, Enum):
    DEPENDENCY = "dependency"
    CALL = "call"
    INCLUDE = "include"
    CONTAIN = "contain"
    REFERENCE = "reference"


class Language(str, Enum):
    CPP = "cpp"
    PYTHON = "python"


CALLABLE_KINDS = frozenset({EntityKind.FUNCTION, EntityKind.METHOD})
FILE_EDGE_KINDS = frozenset({RelationKind.DEPENDENCY, RelationKind.INCLUDE})


class GraphIntegrityError(ValueError):
    """Raised when a graph violates referential or structural invariants."""


class UnknownEntityError(KeyError):
    """Raised when a query names an entity id absent from the graph."""


@dataclass(frozen=True)
class Span:
    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError(f"span start {self.start} > end {self.end}")

    def contains(self, line: int) -> bool:
        return self.start <= line <= self.end


@dataclass(frozen=True)
class Signature:
    """Parameter list of a callable.

    ``params`` excludes an implicit receiver (``self``/``cls``). ``required``
    is the number of parameters without defaults; ``variadic`` is set for
    ``*args``/``**kwargs`` or C-style ellipsis.
    """

    params: tuple[str, ...]
    required: int
    variadic: bool = False

    @property
    def count(self) -> int:
        return len(self.params)

    def accepts(self, nargs: int) -> bool:
        if nargs < self.required:
            return False
        return self.variadic or nargs <= self.count


def entity_id(kind: EntityKind, name: str, file_path: str, ordinal: int = 0) -> str:
    """Stable content-address id for an entity.

    sha256 over ``kind NUL name NUL file_path``, hex, first 16 chars. A
    non-zero ``ordinal`` disambiguates same-named declarations in one file
    (C++ overloads) and is appended as ``NUL ordinal``.
    """
    key = f"{EntityKind(kind).value}\0{name}\0{file_path}"
    if ordinal:
        key += f"\0{ordinal}"
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class Entity:
    id: str
    kind: EntityKind
    name: str
    file_path: str
    span: Span
    body_text: str = ""
    signature: Signature | None = None
    declaration: bool = False

    @property
    def short_name(self) -> str:
        if self.kind is EntityKind.FILE:
            return self.name
        for sep in ("::", "."):
            if sep in self.name:
                return self.name.rsplit(sep, 1)[1]
        return self.name

    @property
    def scope(self) -> str:
        """Qualifier part of the name (namespace/module/class), or ''."""
        if self.kind is EntityKind.FILE:
            return ""
        for sep in ("::", "."):
            if sep in self.name:
                return self.name.rsplit(sep, 1)[0]
        return ""

    def validate(self) -> None:
        if self.kind is EntityKind.FILE and self.name != self.file_path:
            raise GraphIntegrityError(f"file entity {self.id} name != path")
        if (self.signature is not None) != (self.kind in CALLABLE_KINDS):
            raise GraphIntegrityError(
                f"entity {self.name!r}: signature must be present iff callable"
            )


@dataclass(frozen=True)
class Evidence:
    file_path: str
    line: int


@dataclass(frozen=True)
class Relation:
    src: str
    dst: str
    kind: RelationKind
    evidence: Evidence | None = None


@dataclass
class Diagnostic:
    file_path: str
    line: int
    tag: str
    message: str

    def to_record(self) -> dict:
        return {"file": self.file_path, "line": self.line, "tag": self.tag, "message": self.message}


@dataclass
class CodeGraph:
    language: Language
    entities: dict[str, Entity] = field(default_factory=dict)
    relations: list[Relation] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    # lazily built indexes; invalidated by add_* calls
    _out: dict[str, list[Relation]] | None = field(default=None, repr=False, compare=False)
    _in: dict[str, list[Relation]] | None = field(default=None, repr=False, compare=False)

    def add_entity(self, entity: Entity) -> None:
        if entity.id in self.entities:
            raise GraphIntegrityError(f"duplicate entity id {entity.id} ({entity.name})")
        self.entities[entity.id] = entity
        self._out = self._in = None

    def add_relation(self, relation: Relation) -> None:
        self.relations.append(relation)
        self._out = self._in = None

    def __contains__(self, entity_id: str) -> bool:
        return entity_id in self.entities

    def __getitem__(self, entity_id: str) -> Entity:
        try:
            return self.entities[entity_id]
        except KeyError:
            raise UnknownEntityError(entity_id) from None

    def _index(self) -> None:
        out: dict[str, list[Relation]] = {}
        inc: dict[str, list[Relation]] = {}
        for rel in self.relations:
            out.setdefault(rel.src, []).append(rel)
            inc.setdefault(rel.dst, []).append(rel)
        self._out, self._in = out, inc

    def out_edges(self, entity_id: str, kinds: Iterable[RelationKind] | None = None) -> list[Relation]:
        if self._out is None:
            self._index()
        rels = self._out.get(entity_id, [])
        if kinds is None:
            return list(rels)
        wanted = set(kinds)
        return [r for r in rels if r.kind in wanted]

    def in_edges(self, entity_id: str, kinds: Iterable[RelationKind] | None = None) -> list[Relation]:
        if self._in is None:
            self._index()
        rels = self._in.get(entity_id, [])
        if kinds is None:
            return list(rels)
        wanted = set(kinds)
        return [r for r in rels if r.kind in wanted]

    def of_kind(self, *kinds: EntityKind) -> Iterator[Entity]:
        wanted = set(kinds)
        for ent in sorted(self.entities.values(), key=lambda e: (e.file_path, e.span.start, e.name, e.id)):
            if ent.kind in wanted:
                yield ent

    def files(self) -> list[Entity]:
        return sorted(self.of_kind(EntityKind.FILE), key=lambda e: e.file_path)

    def file_entity(self, path: str) -> Entity:
        fid = entity_id(EntityKind.FILE, path, path)
        return self[fid]

    def parent(self, entity_id: str) -> Entity | None:
        for rel in self.in_edges(entity_id, [RelationKind.CONTAIN]):
            return self.entities[rel.src]
        return None

    def contain_chain(self, entity_id: str) -> list[Entity]:
        """Ancestors from the enclosing file down to the direct parent."""
        chain = []
        cur = self.parent(entity_id)
        while cur is not None:
            chain.append(cur)
            cur = self.parent(cur.id)
        return chain[::-1]

    def names(self) -> set[str]:
        """Every qualified and short name of every entity."""
        out = set()
        for ent in self.entities.values():
            out.add(ent.name)
            out.add(ent.short_name)
        return out

    @property
    def content_hash(self) -> str:
        """sha256 over entities sorted by id; each contributes ``id NUL body NUL``."""
        h = hashlib.sha256()
        for eid in sorted(self.entities):
            h.update(eid.encode("utf-8") + b"\0")
            h.update(self.entities[eid].body_text.encode("utf-8") + b"\0")
        return h.hexdigest()

    def check_integrity(self) -> None:
        for ent in self.entities.values():
            ent.validate()
        parents: dict[str, str] = {}
        for rel in self.relations:
            if rel.src not in self.entities or rel.dst not in self.entities:
                raise GraphIntegrityError(f"dangling relation {rel.kind.value} {rel.src}->{rel.dst}")
            if rel.kind in FILE_EDGE_KINDS:
                if (
                    self.entities[rel.src].kind is not EntityKind.FILE
                    or self.entities[rel.dst].kind is not EntityKind.FILE
                ):
                    raise GraphIntegrityError(f"{rel.kind.value} edge between non-file entities")
            if rel.kind is RelationKind.CONTAIN:
                if rel.dst in parents and parents[rel.dst] != rel.src:
                    raise GraphIntegrityError(f"entity {rel.dst} has two containers")
                parents[rel.dst] = rel.src
        for eid, ent in self.entities.items():
            if ent.kind is EntityKind.FILE:
                if eid in parents:
                    raise GraphIntegrityError(f"file {ent.name} is contained by another entity")
                continue
            # walk to root; must end at a file
            seen = {eid}
            cur = eid
            while cur in parents:
                cur = parents[cur]
                if cur in seen:
                    raise GraphIntegrityError(f"contain cycle through {ent.name}")
                seen.add(cur)
            if self.entities[cur].kind is not EntityKind.FILE:
                raise GraphIntegrityError(f"contain tree of {ent.name} not rooted at a file")

    def edge_set(self) -> set[tuple[str, str, str]]:
        return {(r.kind.value, r.src, r.dst) for r in self.relations}
