"""Line-delimited record files with a versioned header, and their schemas.

Every file written here starts with one header object::

    {"format": "repocorpus", "schema": "<name>", "version": 1, ...}

followed by one JSON object per line. Keys are sorted and output is UTF-8,
so equal content always gives equal bytes.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable

from ..context import ContextBundle
from ..graph import CodeGraph, EntityKind, RelationKind, load_graph
from ..sft.composition import CompositionTask, GradingCriterion, TaskFormat
from ..sft.relation import Polarity, RelationEdge, RelationSample, Slot
from ..sft.utilization import RepairStep, UtilizationSample

FORMAT = "repocorpus"
SCHEMA_VERSION = 1


class CorpusReadError(OSError):
    pass


class RecordKind(str, Enum):
    RELATION = "relation"
    COMPOSITION = "composition"
    UTILIZATION = "utilization"


def dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def header(schema: str, **meta) -> dict:
    return {"format": FORMAT, "schema": schema, "version": SCHEMA_VERSION, **meta}


def write_jsonl(path: str | os.PathLike, schema: str, records: Iterable[dict], **meta) -> str:
    """Write header + records; returns the sha256 of the bytes written."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    lines = [dumps(header(schema, **meta))] + [dumps(r) for r in records]
    data = ("\n".join(lines) + "\n").encode("utf-8")
    p.write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def read_jsonl(path: str | os.PathLike, schema: str | None = None) -> tuple[dict, list[dict]]:
    """Returns (header, records). Raises :class:`CorpusReadError` on I/O or header problems."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CorpusReadError(f"cannot read {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise CorpusReadError(f"{path}: empty file, no header")
    try:
        head = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise CorpusReadError(f"{path}: header is not JSON: {exc}") from exc
    if not isinstance(head, dict) or head.get("format") != FORMAT:
        raise CorpusReadError(f"{path}: missing repocorpus header")
    if head.get("version") != SCHEMA_VERSION:
        raise CorpusReadError(f"{path}: unsupported version {head.get('version')}")
    if schema is not None and head.get("schema") != schema:
        raise CorpusReadError(f"{path}: expected schema {schema}, found {head.get('schema')}")
    return head, [json.loads(ln) for ln in lines[1:]]


def file_digest(path: str | os.PathLike) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# -- SFT records ---------------------------------------------------------------


@dataclass
class SftRecord:
    id: str
    kind: RecordKind
    instruction: str
    context: ContextBundle | None
    reasoning_trace: str
    response: str
    metadata: dict = field(default_factory=dict)
    general: bool = False

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "kind": RecordKind(self.kind).value,
            "instruction": self.instruction,
            "context": self.context.to_record() if self.context is not None else None,
            "reasoning_trace": self.reasoning_trace,
            "response": self.response,
            "metadata": self.metadata,
            "general": self.general,
        }

    @classmethod
    def from_record(cls, rec: dict) -> SftRecord:
        ctx = rec.get("context")
        return cls(
            rec["id"],
            RecordKind(rec["kind"]),
            rec["instruction"],
            ContextBundle.from_record(ctx) if ctx else None,
            rec["reasoning_trace"],
            rec["response"],
            rec.get("metadata", {}),
            bool(rec.get("general", False)),
        )


SFT_FIELDS = {
    "id": str,
    "kind": str,
    "instruction": str,
    "reasoning_trace": str,
    "response": str,
    "metadata": dict,
    "general": bool,
}


@dataclass(frozen=True)
class Violation:
    line: int
    record_id: str
    message: str

    def __str__(self) -> str:
        return f"line {self.line} [{self.record_id or '?'}]: {self.message}"


def _companion_graph(path: Path, head: dict, graph: CodeGraph | None) -> CodeGraph | None:
    if graph is not None:
        return graph
    name = head.get("graph")
    if not name:
        return None
    gp = Path(name) if Path(name).is_absolute() else path.parent / name
    return load_graph(gp) if gp.exists() else None


def validate_corpus(path: str | os.PathLike, graph: CodeGraph | None = None) -> list[Violation]:
    """Schema and invariant check of an SFT corpus file.

    Provenance ids are resolved against ``graph`` or, failing that, the
    graph file named in the header (relative to the corpus file).
    """
    p = Path(path)
    head, records = read_jsonl(p)
    out: list[Violation] = []
    if head.get("schema") != "sft":
        out.append(Violation(1, "", f"schema is {head.get('schema')!r}, expected 'sft'"))
        return out
    g = _companion_graph(p, head, graph)
    if g is None:
        out.append(Violation(1, "", "no companion graph; provenance ids cannot be resolved"))
    seen: set[str] = set()
    for n, rec in enumerate(records, start=2):
        rid = str(rec.get("id", "")) if isinstance(rec, dict) else ""
        if not isinstance(rec, dict):
            out.append(Violation(n, "", "record is not an object"))
            continue
        bad = False
        for key, typ in SFT_FIELDS.items():
            if key not in rec:
                out.append(Violation(n, rid, f"missing field {key!r}"))
                bad = True
            elif not isinstance(rec[key], typ):
                out.append(Violation(n, rid, f"field {key!r} should be {typ.__name__}"))
                bad = True
        if bad:
            continue
        if rid in seen:
            out.append(Violation(n, rid, "duplicate id"))
        seen.add(rid)
        if rec["general"]:
            continue
        if rec["kind"] not in {k.value for k in RecordKind}:
            out.append(Violation(n, rid, f"unknown kind {rec['kind']!r}"))
            continue
        if rec.get("context") is not None:
            try:
                ContextBundle.from_record(rec["context"])
            except (KeyError, TypeError, ValueError) as exc:
                out.append(Violation(n, rid, f"malformed context: {exc}"))
        meta = rec["metadata"]
        if meta.get("accepted", True) and (not rec["reasoning_trace"].strip() or not rec["response"].strip()):
            out.append(Violation(n, rid, "accepted record with empty reasoning_trace or response"))
        prov = meta.get("provenance")
        if not isinstance(prov, list) or not prov:
            out.append(Violation(n, rid, "metadata.provenance must be a non-empty list"))
        elif g is not None:
            missing = [i for i in prov if i not in g]
            if missing:
                out.append(Violation(n, rid, f"unknown provenance ids: {', '.join(map(str, missing))}"))
    return out


# -- sample (pre-trace) serialization ------------------------------------------


def _slot(s: Slot) -> dict:
    return {"kind": s.kind.value, "name": s.name, "entity_id": s.entity_id}


def relation_to_record(s: RelationSample) -> dict:
    return {
        "id": s.id,
        "edge": {"src": _slot(s.edge.src), "kind": s.edge.kind.value, "dst": _slot(s.edge.dst)},
        "statement": s.statement,
        "polarity": s.polarity.value,
        "context": s.context.to_record() if s.context else None,
        "paraphrases": list(s.paraphrases),
        "origin": s.origin,
        "skipped": s.skipped,
    }


def relation_from_record(rec: dict) -> RelationSample:
    e = rec["edge"]

    def slot(d: dict) -> Slot:
        return Slot(EntityKind(d["kind"]), d["name"], d.get("entity_id"))

    return RelationSample(
        rec["id"],
        RelationEdge(slot(e["src"]), RelationKind(e["kind"]), slot(e["dst"])),
        rec["statement"],
        Polarity(rec["polarity"]),
        ContextBundle.from_record(rec["context"]) if rec.get("context") else None,
        list(rec.get("paraphrases", [])),
        rec.get("origin"),
        rec.get("skipped"),
    )


def composition_to_record(t: CompositionTask) -> dict:
    return {
        "id": t.id,
        "combination": t.combination,
        "source_test": t.source_test,
        "format": t.format.value,
        "difficulty": t.difficulty,
        "statement": t.statement,
        "reference_answer": t.reference_answer,
        "grading_criteria": [c.to_record() for c in t.grading_criteria],
        "context": t.context.to_record(),
        "prompt_version": t.prompt_version,
        "apis": list(t.apis),
    }


def composition_from_record(rec: dict) -> CompositionTask:
    return CompositionTask(
        rec["id"],
        rec["combination"],
        rec["source_test"],
        TaskFormat(rec["format"]),
        rec["difficulty"],
        rec["statement"],
        rec["reference_answer"],
        tuple(GradingCriterion(c["point"], c["entity_id"], c["entity"]) for c in rec["grading_criteria"]),
        ContextBundle.from_record(rec["context"]),
        rec["prompt_version"],
        tuple(rec.get("apis", ())),
    )


def utilization_to_record(s: UtilizationSample) -> dict:
    return {
        "id": s.id,
        "source_test": s.source_test,
        "functional_code": s.functional_code,
        "assertions": s.assertions,
        "instruction": s.instruction,
        "entry": s.entry,
        "context": s.context.to_record(),
        "language": s.language,
        "repair_log": [r.to_record() for r in s.repair_log],
        "rejected": s.rejected,
        "last_diagnostic": s.last_diagnostic,
    }


def utilization_from_record(rec: dict) -> UtilizationSample:
    return UtilizationSample(
        rec["id"],
        rec["source_test"],
        rec["functional_code"],
        rec["assertions"],
        rec["instruction"],
        rec["entry"],
        ContextBundle.from_record(rec["context"]),
        rec["language"],
        [RepairStep(r["attempt"], r["diagnostic_digest"], r["patch"]) for r in rec.get("repair_log", [])],
        rec.get("rejected"),
        rec.get("last_diagnostic", ""),
    )


SAMPLE_CODECS = {
    RecordKind.RELATION: (relation_to_record, relation_from_record),
    RecordKind.COMPOSITION: (composition_to_record, composition_from_record),
    RecordKind.UTILIZATION: (utilization_to_record, utilization_from_record),
}


def write_samples(path: str | os.PathLike, kind: RecordKind, samples: Iterable, **meta) -> str:
    enc = SAMPLE_CODECS[kind][0]
    return write_jsonl(path, f"{kind.value}-samples", (enc(s) for s in samples), **meta)


def read_samples(path: str | os.PathLike) -> tuple[RecordKind, dict, list]:
    head, recs = read_jsonl(path)
    schema = str(head.get("schema", ""))
    if not schema.endswith("-samples"):
        raise CorpusReadError(f"{path}: not a sample file (schema {schema!r})")
    kind = RecordKind(schema[: -len("-samples")])
    dec = SAMPLE_CODECS[kind][1]
    return kind, head, [dec(r) for r in recs]
