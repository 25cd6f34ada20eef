"""The single boundary to generation models."""

from __future__ import annotations

import logging
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, TypeVar

from ..context import EMPTY_CONTEXT, ContextBundle
from .clients import ChatClient, HttpChatClient, RecordingClient, ReplayClient
from .types import Completion, GatewayError, GenRequest, JudgeVerdict, Role, Sampling, TraceResult, TransportError

log = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

BACKENDS = ("http", "replay", "synthetic")


@dataclass
class GatewayConfig:
    backend: str = "synthetic"
    endpoint: str | None = None
    reasoning_model: str = "reasoning"
    chat_model: str = "chat"
    temperature: float = 0.7
    attempts: int = 4
    concurrency: int = 4
    replay_path: str | None = None
    record_path: str | None = None
    transport_retries: int = 3
    backoff_seconds: float = 0.5
    timeout_seconds: float = 120.0

    def __post_init__(self) -> None:
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}")
        if self.attempts < 1:
            raise ValueError("attempts (K) must be >= 1")
        if self.concurrency < 1:
            raise ValueError("concurrency must be >= 1")
        if self.transport_retries < 0:
            raise ValueError("transport_retries must be >= 0")
        if self.backend == "replay" and not self.replay_path:
            raise ValueError("replay backend needs replay_path")

    def with_env(self) -> GatewayConfig:
        """Apply REPOCORPUS_ENDPOINT / REPOCORPUS_API_KEY overrides."""
        endpoint = os.environ.get("REPOCORPUS_ENDPOINT")
        return replace(self, endpoint=endpoint) if endpoint else self


def make_client(cfg: GatewayConfig, seed: int = 0) -> ChatClient:
    if cfg.backend == "http":
        if not cfg.endpoint:
            raise ValueError("http backend needs an endpoint")
        client: ChatClient = HttpChatClient(
            cfg.endpoint, cfg.reasoning_model, cfg.chat_model, os.environ.get("REPOCORPUS_API_KEY"), cfg.timeout_seconds
        )
    elif cfg.backend == "replay":
        client = ReplayClient(cfg.replay_path)
    else:
        from .synthetic import SyntheticClient

        client = SyntheticClient(seed)
    if cfg.record_path:
        client = RecordingClient(client, cfg.record_path)
    return client


_VERDICT = re.compile(r"^\s*VERDICT:\s*(consistent|inconsistent)\s*$", re.I | re.M)
_RATIONALE = re.compile(r"^\s*RATIONALE:\s*(.+)$", re.I | re.M)


def parse_judge(text: str) -> JudgeVerdict:
    """Fail-closed parse of a judge reply."""
    found = _VERDICT.findall(text)
    if len(found) != 1:
        return JudgeVerdict(False, "malformed judge output", text)
    m = _RATIONALE.search(text)
    rationale = m.group(1).strip().splitlines()[0] if m else ""
    return JudgeVerdict(found[0].lower() == "consistent", rationale, text)


@dataclass
class CallCounter:
    generations: int = 0
    transport_failures: int = 0
    by_role: dict[str, int] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def hit(self, role: Role) -> None:
        with self._lock:
            self.generations += 1
            self.by_role[role.value] = self.by_role.get(role.value, 0) + 1

    def failure(self) -> None:
        with self._lock:
            self.transport_failures += 1


class Gateway:
    """Blocking request API over a pluggable client.

    In-flight requests are bounded by a semaphore of size
    ``cfg.concurrency``. Transport errors are retried with exponential
    backoff; other gateway errors surface immediately.
    """

    def __init__(self, client: ChatClient, cfg: GatewayConfig | None = None, sleep: Callable[[float], None] = time.sleep) -> None:
        self.client = client
        self.cfg = cfg or GatewayConfig()
        self.counter = CallCounter()
        self._slots = threading.BoundedSemaphore(self.cfg.concurrency)
        self._sleep = sleep

    @classmethod
    def from_config(cls, cfg: GatewayConfig, seed: int = 0) -> Gateway:
        cfg = cfg.with_env()
        return cls(make_client(cfg, seed), cfg)

    def sampling(self, seed: int, attempts: int | None = None) -> Sampling:
        return Sampling(self.cfg.temperature, attempts or self.cfg.attempts, seed)

    def generate(self, req: GenRequest, attempt: int = 1) -> Completion:
        """One logical generation call (counted once, however many transport retries)."""
        self.counter.hit(req.role)
        delay = self.cfg.backoff_seconds
        for retry in range(self.cfg.transport_retries + 1):
            try:
                with self._slots:
                    return self.client.complete(req, attempt)
            except TransportError as exc:
                self.counter.failure()
                if retry == self.cfg.transport_retries:
                    raise GatewayError(f"transport failed after {retry + 1} tries: {exc}") from exc
                log.warning("transport error on %s (try %d): %s", req.role.value, retry + 1, exc)
                self._sleep(delay)
                delay *= 2
        raise AssertionError("unreachable")

    def rejection_sample(self, req: GenRequest, acceptor: Callable[[TraceResult], object]) -> TraceResult:
        """Draw up to K candidates and return the first one ``acceptor`` passes.

        When none passes, the last candidate is returned with
        ``accepted=False`` so callers can log why.
        """
        k = req.sampling.attempts
        last = None
        for i in range(1, k + 1):
            out = self.generate(req, i)
            cand = TraceResult(out.reasoning, out.content, i, False, i)
            if bool(acceptor(cand)):
                return replace(cand, accepted=True)
            last = cand
        assert last is not None
        return last

    def judge_consistency(
        self, reference: str, candidate: str, context: ContextBundle = EMPTY_CONTEXT, seed: int = 0, question: str = ""
    ) -> JudgeVerdict:
        if not reference.strip() or not candidate.strip():
            raise ValueError("judge_consistency needs non-empty reference and candidate")
        if reference.strip() == candidate.strip():
            return JudgeVerdict(True, "identical texts")
        prompt = f"## Question\n{question}\n\n## Reference answer\n{reference}\n\n## Candidate answer\n{candidate}"
        req = GenRequest(Role.JUDGE, prompt, context, self.sampling(seed, 1), hints={"reference": reference, "candidate": candidate})
        try:
            out = self.generate(req)
        except GatewayError as exc:
            return JudgeVerdict(False, f"judge unavailable: {exc}")
        return parse_judge(out.content)

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
        """Apply ``fn`` concurrently; results keep input order."""
        items = list(items)
        if self.cfg.concurrency == 1 or len(items) <= 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(self.cfg.concurrency) as pool:
            return list(pool.map(fn, items))
