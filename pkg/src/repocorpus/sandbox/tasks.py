"""On-disk task packages and attempt files.

Layout of a task directory::

    <tasks>/<task_id>/task.json        {"id", "language", "description", "entry"}
    <tasks>/<task_id>/reference.<ext>  reference implementation
    <tasks>/<task_id>/tests.<ext>      test code (C++: defines main)

Attempts are line-delimited ``{"task_id", "attempt_index", "code"}``; a
leading format header line (as written by the corpus tools) is skipped.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

EXT = {"cpp": "cpp", "python": "py"}


@dataclass(frozen=True)
class TaskPackage:
    id: str
    language: str
    description: str
    reference: str
    tests: str
    entry: str = ""


def write_task(root: str | Path, task: TaskPackage) -> Path:
    d = Path(root) / task.id
    d.mkdir(parents=True, exist_ok=True)
    meta = {"id": task.id, "language": task.language, "description": task.description, "entry": task.entry}
    (d / "task.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (d / f"reference.{EXT[task.language]}").write_text(task.reference, encoding="utf-8")
    (d / f"tests.{EXT[task.language]}").write_text(task.tests, encoding="utf-8")
    return d


def load_tasks(root: str | Path) -> dict[str, TaskPackage]:
    out = {}
    for meta_path in sorted(Path(root).glob("*/task.json")):
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        ext = EXT[meta["language"]]
        d = meta_path.parent
        out[meta["id"]] = TaskPackage(
            meta["id"],
            meta["language"],
            meta.get("description", ""),
            (d / f"reference.{ext}").read_text(encoding="utf-8"),
            (d / f"tests.{ext}").read_text(encoding="utf-8"),
            meta.get("entry", ""),
        )
    return out


def load_attempts(path: str | Path) -> list[dict]:
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            rec = json.loads(line)
            if not rows and rec.get("format") == "repocorpus":
                continue
            if not {"task_id", "attempt_index", "code"} <= rec.keys():
                raise ValueError(f"attempt record missing fields: {sorted(rec)}")
            rows.append(rec)
    return rows
