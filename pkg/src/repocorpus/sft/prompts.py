"""Versioned prompt templates shipped with the package."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    text: str

    @property
    def version(self) -> str:
        """Content hash; recorded in sample metadata."""
        return f"{self.name}@{hashlib.sha256(self.text.encode('utf-8')).hexdigest()[:12]}"

    def render(self, **fields: object) -> str:
        return self.text.format(**fields)


@lru_cache(maxsize=None)
def load_prompt(name: str) -> PromptTemplate:
    text = resources.files("repocorpus.sft").joinpath("prompts").joinpath(f"{name}.txt").read_text(encoding="utf-8")
    return PromptTemplate(name, text)
