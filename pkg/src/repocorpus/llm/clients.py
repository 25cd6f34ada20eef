"""Backends behind the gateway: HTTP, transcript replay, recording, scripted."""

from __future__ import annotations

import json
import logging
import os
import re
import threading
import urllib.error
import urllib.request
from pathlib import Path
from typing import Callable, Protocol

from .types import Completion, GatewayError, GenRequest, Mode, Role, TransportError

log = logging.getLogger(__name__)

SYSTEM_PROMPTS = {
    Role.PARAPHRASE: "Rewrite statements about a codebase. Keep every identifier exactly as written.",
    Role.NEGATIVE_NATURALIZE: "Make an identifier read like a plausible name from the given codebase. Reply with the name only.",
    Role.TASK_DESIGN: "Design exam tasks about a codebase. Reply with a single JSON object.",
    Role.TRACE_GENERATION: "Answer using only the provided code context. Think step by step before answering.",
    Role.DECOMPOSE: "Split a unit test into functional code and assertions. Reply with a single JSON object.",
    Role.REPAIR: "Fix the code so it compiles. Reply with the complete corrected code only.",
    Role.JUDGE: "Decide whether two answers are semantically consistent. Reply 'VERDICT: consistent' or 'VERDICT: inconsistent', then 'RATIONALE: <one line>'.",
}

_THINK = re.compile(r"<think>(.*?)</think>", re.S)


class ChatClient(Protocol):
    def complete(self, req: GenRequest, attempt: int) -> Completion: ...


def split_reasoning(text: str) -> Completion:
    """Separate a ``<think>...</think>`` block from the answer text."""
    m = _THINK.search(text)
    if not m:
        return Completion(text.strip())
    return Completion((text[: m.start()] + text[m.end() :]).strip(), m.group(1).strip())


def build_messages(req: GenRequest) -> list[dict]:
    user = req.prompt
    if len(req.context):
        user = f"{req.prompt}\n\n## Context\n{req.context.render()}"
    return [{"role": "system", "content": SYSTEM_PROMPTS[req.role]}, {"role": "user", "content": user}]


class HttpChatClient:
    """Minimal chat-completions client (OpenAI-compatible wire format)."""

    def __init__(self, endpoint: str, reasoning_model: str, chat_model: str, api_key: str | None = None, timeout: float = 120.0) -> None:
        self.endpoint = endpoint.rstrip("/")
        self.models = {Mode.REASONING: reasoning_model, Mode.CHAT: chat_model}
        self.api_key = api_key
        self.timeout = timeout

    def complete(self, req: GenRequest, attempt: int) -> Completion:
        body = {
            "model": self.models[req.mode],
            "messages": build_messages(req),
            "temperature": req.sampling.temperature,
            "seed": req.sampling.seed * 1000 + attempt,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        http_req = urllib.request.Request(f"{self.endpoint}/chat/completions", json.dumps(body).encode(), headers)
        try:
            with urllib.request.urlopen(http_req, timeout=self.timeout) as resp:
                data = json.load(resp)
        except urllib.error.HTTPError as exc:
            if exc.code >= 500 or exc.code == 429:
                raise TransportError(f"HTTP {exc.code}") from exc
            raise GatewayError(f"HTTP {exc.code}: {exc.read()[:200]!r}") from exc
        except (urllib.error.URLError, TimeoutError, ConnectionError) as exc:
            raise TransportError(str(exc)) from exc
        try:
            msg = data["choices"][0]["message"]
        except (KeyError, IndexError, TypeError) as exc:
            raise GatewayError(f"unexpected response shape: {str(data)[:200]}") from exc
        out = split_reasoning(msg.get("content") or "")
        reasoning = msg.get("reasoning_content") or msg.get("reasoning") or out.reasoning
        return Completion(out.content, reasoning or "")


class ReplayClient:
    """Serves completions from a transcript file keyed by request digest.

    Transcript lines are ``{"digest": ..., "response": {"content", "reasoning"}}``;
    extra keys (role, attempt) are informational.
    """

    def __init__(self, path: str | os.PathLike) -> None:
        self.path = Path(path)
        self.table: dict[str, Completion] = {}
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    rec = json.loads(line)
                    self.table[rec["digest"]] = Completion.from_record(rec["response"])

    def complete(self, req: GenRequest, attempt: int) -> Completion:
        key = req.digest(attempt)
        try:
            return self.table[key]
        except KeyError:
            raise GatewayError(f"no transcript entry for {req.role.value} request {key[:12]} (attempt {attempt})") from None


class RecordingClient:
    """Wraps another client and appends every exchange to a transcript."""

    def __init__(self, inner: ChatClient, path: str | os.PathLike) -> None:
        self.inner = inner
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._seen: dict[str, Completion] = {}
        self.conflicts = 0

    def complete(self, req: GenRequest, attempt: int) -> Completion:
        out = self.inner.complete(req, attempt)
        key = req.digest(attempt)
        with self._lock:
            if key in self._seen:
                if self._seen[key] != out:
                    # a replay can only serve the first of these
                    self.conflicts += 1
                    log.warning("digest %s (%s) recorded with a different response; replay will diverge", key, req.role.value)
            else:
                self._seen[key] = out
                rec = {"digest": key, "role": req.role.value, "attempt": attempt, "response": out.to_record()}
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(rec, sort_keys=True, ensure_ascii=False) + "\n")
        return out


Responder = Callable[[GenRequest, int], "Completion | str | Exception"]


class ScriptedClient:
    """Test double driven by a function or per-role response queues.

    Queue entries may be strings, Completions or exceptions (raised); the
    last entry repeats once the others are used up. A callable responder
    receives ``(request, attempt)``.
    """

    def __init__(self, script: Responder | dict[Role | str, list] | None = None) -> None:
        self.fn: Responder | None = script if callable(script) else None
        self.queues = {Role(k): list(v) for k, v in (script or {}).items()} if isinstance(script, dict) else {}
        self.calls: list[tuple[Role, int]] = []

    def complete(self, req: GenRequest, attempt: int) -> Completion:
        self.calls.append((req.role, attempt))
        if self.fn is not None:
            item = self.fn(req, attempt)
        else:
            q = self.queues.get(req.role)
            if not q:
                raise GatewayError(f"script exhausted for role {req.role.value}")
            item = q.pop(0) if len(q) > 1 else q[0]
        if isinstance(item, Exception):
            raise item
        if isinstance(item, Completion):
            return item
        return split_reasoning(str(item))
