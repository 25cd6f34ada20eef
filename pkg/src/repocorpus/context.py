"""Evidence bundles handed to the generator alongside a request."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum


class ContextKind(str, Enum):
    FILE_CONTENTS = "file_contents"
    ENTITY_NAME_LIST = "entity_name_list"
    DEPENDENCY_CLOSURE_CODE = "dependency_closure_code"


@dataclass(frozen=True)
class ContextItem:
    label: str
    text: str
    entity_id: str | None = None


@dataclass(frozen=True)
class ContextBundle:
    """Ordered (label, text) items of one kind.

    For closure bundles the label carries file location and namespace, and
    ``entity_id`` links the item back to the graph.
    """

    kind: ContextKind
    items: tuple[ContextItem, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ContextKind(self.kind))
        object.__setattr__(self, "items", tuple(self.items))

    def __len__(self) -> int:
        return len(self.items)

    @property
    def entity_ids(self) -> set[str]:
        return {i.entity_id for i in self.items if i.entity_id}

    def render(self) -> str:
        return "\n\n".join(f"### {i.label}\n{i.text}" for i in self.items)

    def to_record(self) -> dict:
        rec = {"kind": self.kind.value, "items": []}
        for i in self.items:
            item = {"label": i.label, "text": i.text}
            if i.entity_id:
                item["entity_id"] = i.entity_id
            rec["items"].append(item)
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> ContextBundle:
        return cls(ContextKind(rec["kind"]), tuple(ContextItem(i["label"], i["text"], i.get("entity_id")) for i in rec["items"]))

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_record(), sort_keys=True).encode()).hexdigest()


EMPTY_CONTEXT = ContextBundle(ContextKind.FILE_CONTENTS)
