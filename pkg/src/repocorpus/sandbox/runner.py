"""Compile and run one code attempt in a disposable directory."""

from __future__ import annotations

import hashlib
import os
import shutil
import signal
import subprocess
import sys
import tempfile
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

PY_COMPILE = r"""
import ast, sys
path = sys.argv[1]
sys.path[:0] = sys.argv[2:]
src = open(path, encoding="utf-8").read()
tree = ast.parse(src, path)
compile(tree, path, "exec")
for node in tree.body:
    if isinstance(node, (ast.Import, ast.ImportFrom)):
        exec(compile(ast.Module([node], []), path, "exec"), {})
"""

PY_RUN = r"""
import runpy, sys
path = sys.argv[1]
sys.path[:0] = sys.argv[2:]
ns = runpy.run_path(path, run_name="candidate")
tests = sorted(k for k, v in ns.items() if k.startswith("test") and callable(v))
if not tests:
    sys.stderr.write("no test functions found\n")
    sys.exit(3)
for name in tests:
    ns[name]()
"""


class ToolchainMissingError(RuntimeError):
    pass


class SandboxBusyError(RuntimeError):
    pass


@dataclass(frozen=True)
class Limits:
    wall_seconds: float = 60.0
    output_bytes: int = 64 * 1024 * 1024


@dataclass
class SandboxConfig:
    """Toolchain and limits for one language.

    ``include_dirs`` and ``sources`` (C++) and ``python_path`` (Python) are
    absolute paths into the target repository; candidates are compiled
    against them but never written into them.
    """

    language: str = "cpp"
    cxx: str = "g++"
    cxx_flags: list[str] = field(default_factory=lambda: ["-std=c++17", "-O0", "-w"])
    include_dirs: list[str] = field(default_factory=list)
    sources: list[str] = field(default_factory=list)
    python: str = field(default_factory=lambda: sys.executable or "python3")
    python_path: list[str] = field(default_factory=list)
    limits: Limits = field(default_factory=Limits)
    workers: int = 2
    keep_dirs: bool = False

    def __post_init__(self) -> None:
        if self.language not in ("cpp", "python"):
            raise ValueError("sandbox language must be cpp or python")
        if isinstance(self.limits, dict):
            self.limits = Limits(**self.limits)

    def check_toolchain(self) -> None:
        tool = self.cxx if self.language == "cpp" else self.python
        if shutil.which(tool) is None and not Path(tool).exists():
            raise ToolchainMissingError(f"{tool} not found")


@dataclass(frozen=True)
class ExecOutcome:
    task_id: str
    attempt_index: int
    compiled: bool
    tests_passed: bool
    stderr_digest: str = ""
    wall_time: float = 0.0
    reason: str = "ok"
    stderr: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if self.tests_passed and not self.compiled:
            raise ValueError("tests_passed implies compiled")

    def to_record(self) -> dict:
        return {
            "task_id": self.task_id,
            "attempt_index": self.attempt_index,
            "compiled": self.compiled,
            "tests_passed": self.tests_passed,
            "reason": self.reason,
            "stderr_digest": self.stderr_digest,
            "wall_time": round(self.wall_time, 3),
        }


class DirectoryRegistry:
    """Tracks working directories in use; a directory is never shared."""

    def __init__(self) -> None:
        self._active: set[str] = set()
        self._lock = threading.Lock()
        self.peak = 0

    def acquire(self, path: str) -> None:
        with self._lock:
            if path in self._active:
                raise SandboxBusyError(f"{path} already in use")
            self._active.add(path)
            self.peak = max(self.peak, len(self._active))

    def release(self, path: str) -> None:
        with self._lock:
            self._active.discard(path)

    @property
    def active(self) -> set[str]:
        with self._lock:
            return set(self._active)


REGISTRY = DirectoryRegistry()


@dataclass
class _Proc:
    returncode: int | None
    output: str
    timed_out: bool


def _run(cmd: list[str], cwd: str, limits: Limits, timeout: float) -> _Proc:
    log = Path(cwd) / f".out-{len(os.listdir(cwd))}"
    with open(log, "wb") as fh:
        proc = subprocess.Popen(cmd, cwd=cwd, stdout=fh, stderr=subprocess.STDOUT, stdin=subprocess.DEVNULL, start_new_session=True)
        try:
            rc = proc.wait(timeout=max(timeout, 0.01))
            timed_out = False
        except subprocess.TimeoutExpired:
            os.killpg(proc.pid, signal.SIGKILL)
            proc.wait()
            rc, timed_out = None, True
    with open(log, "rb") as fh:
        data = fh.read(limits.output_bytes)
    # scrub the random directory name so digests are reproducible
    text = data.decode("utf-8", "replace").replace(os.path.realpath(cwd), "<work>").replace(cwd, "<work>")
    return _Proc(rc, text, timed_out)


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16] if text else ""


def _failure_reason(p: _Proc) -> str:
    if p.timed_out:
        return "timeout"
    if "Assertion" in p.output or "AssertionError" in p.output or p.returncode in (-signal.SIGABRT, 134):
        return "assertion"
    if p.returncode is not None and p.returncode < 0:
        return "crash"
    return f"exit-{p.returncode}"


def run_attempt(
    task_id: str, code: str, tests: str, cfg: SandboxConfig, attempt_index: int = 1, compile_only: bool = False
) -> ExecOutcome:
    """Compile ``code`` + ``tests`` as one unit and run the tests.

    C++: one translation unit linked with ``cfg.sources``; the tests
    provide ``main``. Python: syntax check plus top-level import
    resolution, then every ``test*`` function is called. The wall-time
    limit covers both phases together. ``compile_only`` stops after the
    first phase (reason ``compiled``, tests_passed False).
    """
    cfg.check_toolchain()
    work = tempfile.mkdtemp(prefix=f"rc-{task_id[:12]}-")
    REGISTRY.acquire(work)
    start = time.monotonic()
    try:
        budget = cfg.limits.wall_seconds
        if cfg.language == "cpp":
            (Path(work) / "candidate.cpp").write_text(f"{code}\n\n{tests}\n", encoding="utf-8")
            cmd = [cfg.cxx, *cfg.cxx_flags, *(f"-I{d}" for d in cfg.include_dirs), "candidate.cpp", *cfg.sources, "-o", "candidate"]
            run_cmd = ["./candidate"]
        else:
            (Path(work) / "candidate.py").write_text(f"{code}\n\n{tests}\n", encoding="utf-8")
            (Path(work) / "_compile.py").write_text(PY_COMPILE)
            (Path(work) / "_run.py").write_text(PY_RUN)
            paths = [work, *cfg.python_path]
            cmd = [cfg.python, "-I", "_compile.py", "candidate.py", *paths]
            run_cmd = [cfg.python, "-I", "_run.py", "candidate.py", *paths]
        comp = _run(cmd, work, cfg.limits, budget)
        if comp.timed_out or comp.returncode != 0:
            reason = "timeout" if comp.timed_out else "compile-error"
            return ExecOutcome(task_id, attempt_index, False, False, _digest(comp.output), time.monotonic() - start, reason, comp.output)
        if compile_only:
            return ExecOutcome(task_id, attempt_index, True, False, _digest(comp.output), time.monotonic() - start, "compiled", comp.output)
        left = budget - (time.monotonic() - start)
        run = _run(run_cmd, work, cfg.limits, left)
        wall = time.monotonic() - start
        if run.returncode == 0 and not run.timed_out:
            return ExecOutcome(task_id, attempt_index, True, True, _digest(run.output), wall, "ok", run.output)
        return ExecOutcome(task_id, attempt_index, True, False, _digest(run.output), wall, _failure_reason(run), run.output)
    finally:
        REGISTRY.release(work)
        if not cfg.keep_dirs:
            shutil.rmtree(work, ignore_errors=True)


@dataclass(frozen=True)
class AttemptJob:
    task_id: str
    attempt_index: int
    code: str
    tests: str


def run_attempts(jobs: list[AttemptJob], cfg: SandboxConfig) -> list[ExecOutcome]:
    """Run jobs in parallel (``cfg.workers``); results keep job order."""
    with ThreadPoolExecutor(max(1, cfg.workers)) as pool:
        return list(pool.map(lambda j: run_attempt(j.task_id, j.code, j.tests, cfg, j.attempt_index), jobs))
