"""Per-language allowlists of built-in callables."""

from __future__ import annotations

import sys
from functools import lru_cache
from importlib import resources


@lru_cache(maxsize=None)
def builtin_names(language: str) -> frozenset[str]:
    text = resources.files("repocorpus.data").joinpath(f"builtins_{language}.txt").read_text(encoding="utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#"))


STDLIB_MODULES = frozenset(getattr(sys, "stdlib_module_names", ()))


def is_builtin_call(language: str, name: str, qualifier: tuple[str, ...] = ()) -> bool:
    """True when a call to ``qualifier::name`` belongs to the language itself.

    C++: anything under ``std::`` or an allowlisted name. Python: allowlisted
    names, and calls through a standard-library module (``os.path.join``).
    """
    if language == "cpp":
        if qualifier and qualifier[0] in ("std", "::std"):
            return True
        return name in builtin_names("cpp")
    if qualifier and qualifier[0] in STDLIB_MODULES:
        return True
    return name in builtin_names("python")
