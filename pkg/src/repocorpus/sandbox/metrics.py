"""compilation@k and pass@k over recorded attempts.

"Within k attempts" means the first k recorded attempts of each task (by
attempt index); no unbiased combinatorial estimator is applied.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .runner import ExecOutcome


class InsufficientAttemptsError(ValueError):
    pass


def group_outcomes(outcomes: Iterable[ExecOutcome]) -> dict[str, list[ExecOutcome]]:
    grouped: dict[str, list[ExecOutcome]] = defaultdict(list)
    for o in outcomes:
        grouped[o.task_id].append(o)
    return {t: sorted(v, key=lambda o: o.attempt_index) for t, v in sorted(grouped.items())}


def _at_k(grouped: Mapping[str, Sequence[ExecOutcome]], k: int, field: str) -> Fraction:
    if k < 1:
        raise ValueError("k must be >= 1")
    if not grouped:
        raise ValueError("no tasks")
    hits = 0
    for task, attempts in grouped.items():
        if len(attempts) < k:
            raise InsufficientAttemptsError(f"task {task} has {len(attempts)} attempts, k={k}")
        first = sorted(attempts, key=lambda o: o.attempt_index)[:k]
        hits += any(getattr(o, field) for o in first)
    return Fraction(hits, len(grouped))


def compilation_at_k(grouped: Mapping[str, Sequence[ExecOutcome]], k: int) -> Fraction:
    """Fraction of tasks with a compiling attempt among the first ``k``."""
    return _at_k(grouped, k, "compiled")


def pass_at_k(grouped: Mapping[str, Sequence[ExecOutcome]], k: int) -> Fraction:
    """Fraction of tasks with a fully passing attempt among the first ``k``."""
    return _at_k(grouped, k, "tests_passed")
