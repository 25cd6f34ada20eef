from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from ..context import EMPTY_CONTEXT, ContextBundle


class Role(str, Enum):
    PARAPHRASE = "paraphrase"
    NEGATIVE_NATURALIZE = "negative_naturalize"
    TASK_DESIGN = "task_design"
    TRACE_GENERATION = "trace_generation"
    DECOMPOSE = "decompose"
    REPAIR = "repair"
    JUDGE = "judge"


class Mode(str, Enum):
    CHAT = "chat"
    REASONING = "reasoning"


class GatewayError(RuntimeError):
    """The model could not be reached or returned nothing usable."""


class TransportError(GatewayError):
    """A retryable transport failure (connection, 5xx, timeout)."""


@dataclass(frozen=True)
class Sampling:
    temperature: float = 0.7
    attempts: int = 4
    seed: int = 0

    def __post_init__(self) -> None:
        if self.attempts < 1:
            raise ValueError("attempts (K) must be >= 1")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True)
class GenRequest:
    """One generation request.

    ``hints`` carries structured data for offline responders. It is never
    sent over the wire and does not enter the request digest, so replay
    keys depend only on what a real model would see.
    """

    role: Role
    prompt: str
    context: ContextBundle = EMPTY_CONTEXT
    sampling: Sampling = field(default_factory=Sampling)
    mode: Mode | None = None
    hints: dict[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "role", Role(self.role))
        mode = self.mode
        if mode is None:
            mode = Mode.REASONING if self.role is Role.TRACE_GENERATION else Mode.CHAT
        mode = Mode(mode)
        if self.role is Role.TRACE_GENERATION and mode is not Mode.REASONING:
            raise ValueError("trace_generation requests use reasoning mode")
        if self.role is Role.JUDGE and mode is not Mode.CHAT:
            raise ValueError("judge requests use chat mode")
        object.__setattr__(self, "mode", mode)

    def digest(self, attempt: int = 1) -> str:
        payload = {
            "role": self.role.value,
            "mode": self.mode.value,
            "prompt": self.prompt,
            "context": self.context.to_record(),
            "temperature": self.sampling.temperature,
            "seed": self.sampling.seed,
            "attempt": attempt,
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True, ensure_ascii=False).encode()).hexdigest()


@dataclass(frozen=True)
class Completion:
    content: str
    reasoning: str = ""

    def to_record(self) -> dict:
        return {"content": self.content, "reasoning": self.reasoning}

    @classmethod
    def from_record(cls, rec: dict | str) -> Completion:
        if isinstance(rec, str):
            return cls(rec)
        return cls(rec.get("content", ""), rec.get("reasoning", ""))


@dataclass(frozen=True)
class TraceResult:
    reasoning_trace: str
    response: str
    attempt_index: int
    accepted: bool
    attempts: int = 0

    def __post_init__(self) -> None:
        if self.accepted and not 1 <= self.attempt_index <= max(self.attempts, self.attempt_index):
            raise ValueError("accepted trace needs a valid attempt index")


@dataclass(frozen=True)
class JudgeVerdict:
    consistent: bool
    rationale: str
    raw: str = ""

    def __bool__(self) -> bool:
        return self.consistent
