"""Single-hop relation statements with positive and fabricated negatives."""

from __future__ import annotations

import logging
import random
import re
from dataclasses import dataclass, field, replace
from enum import Enum

from ..context import ContextBundle, ContextItem, ContextKind
from ..graph import CodeGraph, EntityKind, GraphIntegrityError, Relation, RelationKind
from ..llm import Gateway, GatewayError, GenRequest, Role
from .common import TYPE_WORDS, sample_id

log = logging.getLogger(__name__)

VERBS = {
    RelationKind.CALL: "calls",
    RelationKind.INCLUDE: "includes",
    RelationKind.DEPENDENCY: "depends on",
    RelationKind.CONTAIN: "contains",
    RelationKind.REFERENCE: "references",
}

DEFAULT_KINDS = (RelationKind.CALL, RelationKind.CONTAIN, RelationKind.INCLUDE, RelationKind.DEPENDENCY)

# function and method share one name pool for negatives
_CATEGORY = {EntityKind.METHOD: EntityKind.FUNCTION}

_SYNONYMS = {
    "add": "append", "get": "fetch", "set": "assign", "total": "sum", "count": "size", "make": "build",
    "put": "store", "take": "remove", "level": "amount", "value": "worth", "price": "cost", "name": "title",
    "load": "read", "save": "write", "open": "start", "close": "stop", "find": "lookup", "parse": "decode",
    "init": "setup", "run": "exec", "item": "entry", "list": "array", "map": "table", "test": "check",
}
_SUFFIXES = ("_ex", "_impl", "_internal", "2", "_v2", "_helper", "_fast", "_safe")


class UnknownRelationKindError(ValueError):
    pass


class MissingFileError(GraphIntegrityError):
    pass


class Polarity(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class Slot:
    kind: EntityKind
    name: str
    entity_id: str | None = None  # None marks a fabricated entity

    @property
    def fabricated(self) -> bool:
        return self.entity_id is None


@dataclass(frozen=True)
class RelationEdge:
    src: Slot
    kind: RelationKind
    dst: Slot

    @classmethod
    def from_relation(cls, graph: CodeGraph, rel: Relation) -> RelationEdge:
        a, b = graph[rel.src], graph[rel.dst]
        return cls(Slot(a.kind, a.name, a.id), rel.kind, Slot(b.kind, b.name, b.id))


@dataclass
class RelationSample:
    id: str
    edge: RelationEdge
    statement: str
    polarity: Polarity
    context: ContextBundle | None = None
    paraphrases: list[str] = field(default_factory=list)
    origin: str | None = None  # id of the positive a negative was derived from
    skipped: str | None = None

    @property
    def fabricated_name(self) -> str | None:
        for s in (self.edge.src, self.edge.dst):
            if s.fabricated:
                return s.name
        return None


def render_relation(edge: RelationEdge) -> str:
    """``[type A] [name A] [verb] [type B] [name B]``."""
    try:
        verb = VERBS[RelationKind(edge.kind)]
    except (KeyError, ValueError):
        raise UnknownRelationKindError(f"no verb for relation kind {edge.kind!r}") from None
    return f"{TYPE_WORDS[edge.src.kind]} {edge.src.name} {verb} {TYPE_WORDS[edge.dst.kind]} {edge.dst.name}"


def select_edges(graph: CodeGraph, kinds=DEFAULT_KINDS, per_kind_cap: int | None = None, seed: int = 0) -> list[Relation]:
    """Edges of the requested kinds, down-sampled to ``per_kind_cap`` each."""
    out = []
    for kind in kinds:
        rels = sorted(
            (r for r in graph.relations if r.kind is kind),
            key=lambda r: (graph[r.src].name, graph[r.src].file_path, graph[r.dst].name, graph[r.dst].file_path),
        )
        uniq = list({(r.src, r.dst): r for r in rels}.values())
        if per_kind_cap is not None and len(uniq) > per_kind_cap:
            rng = random.Random(f"{seed}:{kind.value}")
            keep = set(rng.sample(range(len(uniq)), per_kind_cap))
            uniq = [r for i, r in enumerate(uniq) if i in keep]
        out.extend(uniq)
    return out


def positive_samples(graph: CodeGraph, edges: list[Relation]) -> list[RelationSample]:
    out = []
    for rel in edges:
        edge = RelationEdge.from_relation(graph, rel)
        s = RelationSample(sample_id("relation", rel.kind.value, rel.src, rel.dst), edge, render_relation(edge), Polarity.POSITIVE)
        s.context = assemble_relation_context(s, graph)
        out.append(s)
    return out


def assemble_relation_context(sample: RelationSample, graph: CodeGraph) -> ContextBundle:
    """Ground-truth context for one statement.

    Positives get the full text of the files holding both endpoints (one
    item if they share a file). Negatives get the sorted names of every
    real entity in the categories of the two slots.
    """
    if sample.polarity is Polarity.POSITIVE:
        paths: list[str] = []
        for slot in (sample.edge.src, sample.edge.dst):
            if slot.entity_id not in graph:
                raise MissingFileError(f"entity {slot.name} not in graph")
            p = graph[slot.entity_id].file_path
            if p not in paths:
                paths.append(p)
        items = []
        for p in paths:
            try:
                f = graph.file_entity(p)
            except KeyError:
                raise MissingFileError(f"file {p} missing from graph") from None
            items.append(ContextItem(p, f.body_text, f.id))
        return ContextBundle(ContextKind.FILE_CONTENTS, tuple(items))
    cats: list[EntityKind] = []
    for slot in (sample.edge.src, sample.edge.dst):
        c = _CATEGORY.get(slot.kind, slot.kind)
        if c not in cats:
            cats.append(c)
    items = []
    for c in cats:
        kinds = {k for k in EntityKind if _CATEGORY.get(k, k) is c}
        names = sorted({e.name for e in graph.entities.values() if e.kind in kinds})
        label = "/".join(sorted(TYPE_WORDS[k] for k in kinds)) + " names"
        items.append(ContextItem(label, "\n".join(names)))
    return ContextBundle(ContextKind.ENTITY_NAME_LIST, tuple(items))


def _split_name(name: str, is_path: bool = False) -> tuple[str, str, str]:
    if is_path:
        head, slash, tail = name.rpartition("/")
        return head, slash, tail
    for sep in ("::", "."):
        if sep in name:
            head, tail = name.rsplit(sep, 1)
            return head, sep, tail
    return "", "", name


def mutate_name(name: str, rng: random.Random, taken: set[str], is_path: bool = False) -> str:
    """Seeded, collision-checked perturbation of a real entity name.

    The scope (or directory) is kept so the fabricated name looks like it
    belongs; only the last component changes.
    """
    head, sep, tail = _split_name(name, is_path)
    stem, dot, ext = tail.rpartition(".") if is_path else ("", "", tail)
    base = stem if dot else tail
    for _ in range(64):
        words = re.split(r"(_)", base)
        swaps = [i for i, w in enumerate(words) if w.lower() in _SYNONYMS]
        if swaps and rng.random() < 0.6:
            i = rng.choice(swaps)
            words = words[:]
            words[i] = _SYNONYMS[words[i].lower()]
            new = "".join(words)
        else:
            new = base + rng.choice(_SUFFIXES)
        cand_tail = f"{new}.{ext}" if dot else new
        cand = f"{head}{sep}{cand_tail}"
        if cand not in taken and cand_tail not in taken:
            return cand
        base = new
    raise RuntimeError(f"could not fabricate a fresh name from {name!r}")


_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_NUMBERING = re.compile(r"^\s*(?:\d+[.)]|[-*])\s*")


def _naturalize(gateway: Gateway, mutated: str, slot_kind: EntityKind, taken: set[str], seed: int) -> str:
    is_path = slot_kind is EntityKind.FILE
    head, sep, tail = _split_name(mutated, is_path)
    prompt = f"Identifier kind: {TYPE_WORDS[slot_kind]}\nIdentifier: {tail}\nReply with a natural-looking variant of this identifier."
    req = GenRequest(Role.NEGATIVE_NATURALIZE, prompt, sampling=gateway.sampling(seed), hints={"name": tail})
    for attempt in range(1, req.sampling.attempts + 1):
        reply = gateway.generate(req, attempt).content.strip().strip("`").strip()
        candidate = f"{head}{sep}{reply}"
        ok = (reply and " " not in reply and "/" not in reply) if is_path else _IDENT.match(reply)
        if ok and candidate not in taken and reply not in taken:
            return candidate
    return mutated


def parse_paraphrases(text: str, names: tuple[str, str]) -> list[str]:
    """Numbered or bulleted lines that keep both entity names verbatim."""
    out: list[str] = []
    for line in text.splitlines():
        line = _NUMBERING.sub("", line).strip()
        if line and all(n in line for n in names) and line not in out:
            out.append(line)
    return out


def _paraphrase(gateway: Gateway, sample: RelationSample, n1: int, seed: int) -> list[str] | None:
    names = (sample.edge.src.name, sample.edge.dst.name)
    prompt = (
        f"Statement: {sample.statement}\n"
        f"Write {n1} different paraphrases of the statement, one per line, numbered 1..{n1}. "
        f"Keep the identifiers {names[0]} and {names[1]} exactly as written."
    )
    req = GenRequest(Role.PARAPHRASE, prompt, sampling=gateway.sampling(seed), hints={"statement": sample.statement, "n": n1, "names": names})
    got: list[str] = []
    for attempt in range(1, req.sampling.attempts + 1):
        for p in parse_paraphrases(gateway.generate(req, attempt).content, names):
            if p not in got and p != sample.statement:
                got.append(p)
        if len(got) >= n1:
            return got[:n1]
    return None


def augment_relations(
    samples: list[RelationSample], graph: CodeGraph, gateway: Gateway, n1: int = 5, n2: int = 1, seed: int = 0
) -> list[RelationSample]:
    """Expand positives with ``n1`` paraphrases and add ``n2`` negatives each.

    Per-sample gateway failures mark that sample ``skipped`` (with reason)
    instead of aborting the batch. Output order: each original followed by
    its negatives.
    """
    if n1 < 0 or n2 < 0:
        raise ValueError("n1 and n2 must be >= 0")
    taken = graph.names()
    out: list[RelationSample] = []
    for s in samples:
        if s.polarity is not Polarity.POSITIVE:
            out.append(s)
            continue
        pos = replace(s, paraphrases=[])
        if n1:
            try:
                got = _paraphrase(gateway, s, n1, seed)
            except GatewayError as exc:
                got, pos.skipped = None, f"gateway: {exc}"
            if got is None:
                pos.skipped = pos.skipped or "paraphrase: too few valid variants"
            else:
                pos.paraphrases = got
        out.append(pos)
        rng = random.Random(f"{seed}:{s.id}")
        for j in range(n2):
            which = rng.choice(("src", "dst"))
            real = getattr(s.edge, which)
            mutated = mutate_name(real.name, rng, taken, real.kind is EntityKind.FILE)
            neg_id = sample_id("relation-negative", s.id, j)
            try:
                name = _naturalize(gateway, mutated, real.kind, taken, seed)
            except GatewayError as exc:
                out.append(RelationSample(neg_id, s.edge, s.statement, Polarity.NEGATIVE, origin=s.id, skipped=f"gateway: {exc}"))
                continue
            fake = Slot(real.kind, name, None)
            edge = replace(s.edge, **{which: fake})
            neg = RelationSample(neg_id, edge, render_relation(edge), Polarity.NEGATIVE, origin=s.id)
            neg.context = assemble_relation_context(neg, graph)
            out.append(neg)
    return out


def ground_truth_response(sample: RelationSample) -> str:
    if sample.polarity is Polarity.POSITIVE:
        return f"Yes. The statement holds: {sample.statement}."
    fake = sample.edge.src if sample.edge.src.fabricated else sample.edge.dst
    return f"No. The codebase has no {TYPE_WORDS[fake.kind]} named {fake.name}, so the statement is false."


def relation_instruction(statement: str) -> str:
    return f"Is the following statement about this codebase true? Justify from the code.\nStatement: {statement}"
