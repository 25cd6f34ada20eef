from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class FilterVerdict:
    """Outcome of one rule or model check on one sample.

    ``reason`` is a short machine-readable code (``arity-mismatch``,
    ``timeout`` ...); ``detail`` is free text for humans.
    """

    sample_id: str
    stage: str
    passed: bool
    reason: str = "ok"
    detail: str = ""

    def __bool__(self) -> bool:
        return self.passed

    def to_record(self) -> dict:
        rec = {"sample_id": self.sample_id, "stage": self.stage, "pass": self.passed, "reason": self.reason}
        if self.detail:
            rec["detail"] = self.detail
        return rec

    @classmethod
    def ok(cls, sample_id: str, stage: str, detail: str = "") -> FilterVerdict:
        return cls(sample_id, stage, True, "ok", detail)

    @classmethod
    def fail(cls, sample_id: str, stage: str, reason: str, detail: str = "") -> FilterVerdict:
        return cls(sample_id, stage, False, reason, detail)
