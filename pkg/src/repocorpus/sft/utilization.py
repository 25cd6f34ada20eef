"""Codebase utilization tasks: split tests, repair to compiling, execute."""

from __future__ import annotations

import ast
import difflib
import hashlib
import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..context import ContextBundle
from ..graph import CodeGraph, Entity, EntityKind
from ..llm import Gateway, GatewayError, GenRequest, Role
from ..sandbox import SandboxConfig, run_attempt
from ..verdict import FilterVerdict
from .codecheck import SnippetParseError, check_calls, parse_snippet
from .common import TestMatcher, closure_bundle, sample_id
from .composition import _FENCE, extract_code
from .prompts import load_prompt

CPP_ASSERTS = re.compile(r"\b(assert|static_assert|ASSERT_\w+|EXPECT_\w+|REQUIRE\w*|CHECK\w*)\s*\(")

EXAMPLES = {
    "cpp": """test:
void test_sum() {
    Counter c;
    c.bump(2);
    assert(c.value() == 2);
}
functional_code:
Counter build_sum() {
    Counter c;
    c.bump(2);
    return c;
}
assertions:
int main() {
    Counter c = build_sum();
    assert(c.value() == 2);
    return 0;
}""",
    "python": """test:
def test_sum():
    c = Counter()
    c.bump(2)
    assert c.value() == 2
functional_code:
def build_sum():
    c = Counter()
    c.bump(2)
    return c
assertions:
def test_sum():
    c = build_sum()
    assert c.value() == 2""",
}


@dataclass(frozen=True)
class RepairStep:
    attempt: int
    diagnostic_digest: str
    patch_summary: str

    def to_record(self) -> dict:
        return {"attempt": self.attempt, "diagnostic_digest": self.diagnostic_digest, "patch": self.patch_summary}


@dataclass
class UtilizationSample:
    id: str
    source_test: str
    functional_code: str
    assertions: str
    instruction: str
    entry: str
    context: ContextBundle
    language: str
    repair_log: list[RepairStep] = field(default_factory=list)
    rejected: str | None = None
    last_diagnostic: str = ""


class DecompositionError(ValueError):
    pass


def entry_name(test: Entity) -> str:
    short = test.short_name
    for prefix in ("test_", "TEST_", "test", "Test"):
        if short.startswith(prefix) and len(short) > len(prefix):
            short = short[len(prefix) :]
            break
    return f"build_{short.strip('_')}"


def _has_assertion(code: str, language: str) -> bool:
    if language == "cpp":
        return bool(CPP_ASSERTS.search(code))
    tree = ast.parse(code)
    for node in ast.walk(tree):
        if isinstance(node, ast.Assert):
            return True
        if isinstance(node, ast.Call):
            f = node.func
            name = f.attr if isinstance(f, ast.Attribute) else getattr(f, "id", "")
            if name.startswith("assert") or name == "raises":
                return True
    return False


def _calls_entry(code: str, language: str, entry: str) -> bool:
    snip = parse_snippet(code, language)
    return any(c.name == entry and not c.receiver for c in snip.calls)


def validate_split(functional: str, assertions: str, entry: str, language: str, graph: CodeGraph) -> None:
    """Raise :class:`DecompositionError` unless the split is usable."""
    if not functional.strip() or not assertions.strip():
        raise DecompositionError("empty part")
    try:
        fsnip = parse_snippet(functional, language)
        parse_snippet(assertions, language)
    except SnippetParseError as exc:
        raise DecompositionError(f"part does not parse: {exc}") from exc
    if entry not in fsnip.local_defs:
        raise DecompositionError(f"functional code does not define {entry}")
    if not _has_assertion(assertions, language):
        raise DecompositionError("no assertion construct in assertions")
    if not _calls_entry(assertions, language, entry):
        raise DecompositionError(f"assertions never call {entry}")
    repo_names = {e.short_name for e in graph.entities.values() if e.kind in (EntityKind.FUNCTION, EntityKind.METHOD, EntityKind.CLASS)}
    if not any(c.name in repo_names and c.name not in fsnip.local_defs for c in fsnip.calls):
        raise DecompositionError("functional code invokes no in-repo API")


def decompose_test(
    test: Entity, graph: CodeGraph, gateway: Gateway, seed: int = 0
) -> tuple[str, str, str, str] | FilterVerdict:
    """Returns (functional_code, assertions, instruction, entry) or a skip verdict."""
    language = graph.language.value
    entry = entry_name(test)
    file_text = graph.file_entity(test.file_path).body_text
    header = _file_preamble(file_text, language)
    prompt = load_prompt("decompose_v1").render(
        entry=entry, language=language, example=EXAMPLES[language], test_name=test.name, test_path=test.file_path, test_body=test.body_text
    )
    context = closure_bundle(graph, [test.id], exclude=[test.id])
    hints = {"language": language, "entry": entry, "test_body": test.body_text, "preamble": header, "test_short": test.short_name}
    req = GenRequest(Role.DECOMPOSE, prompt, context, gateway.sampling(seed), hints=hints)
    sid = sample_id("utilization", test.id)
    reason = "decompose: no valid split"
    try:
        for attempt in range(1, req.sampling.attempts + 1):
            reply = gateway.generate(req, attempt).content
            try:
                m = re.search(r"\{.*\}", reply, re.S)
                obj = json.loads(m.group(0)) if m else None
                if not isinstance(obj, dict):
                    raise DecompositionError("reply is not a JSON object")
                functional = str(obj.get("functional_code", ""))
                assertions = str(obj.get("assertions", ""))
                instruction = str(obj.get("instruction", "")).strip()
                got_entry = str(obj.get("entry", entry)).strip() or entry
                if not instruction:
                    raise DecompositionError("instruction missing")
                validate_split(functional, assertions, got_entry, language, graph)
                return functional, assertions, instruction, got_entry
            except (DecompositionError, json.JSONDecodeError) as exc:
                reason = f"decompose: {exc}"
    except GatewayError as exc:
        return FilterVerdict.fail(sid, "decompose", "gateway", str(exc))
    return FilterVerdict.fail(sid, "decompose", "invalid-split", reason)


def _file_preamble(text: str, language: str) -> str:
    """Include/import/using lines of the test's file, in order."""
    keep = []
    for line in text.splitlines():
        s = line.strip()
        if language == "cpp" and (s.startswith("#include") or s.startswith("using namespace")):
            keep.append(s)
        elif language == "python" and (s.startswith("import ") or s.startswith("from ")) and not line.startswith((" ", "\t")):
            keep.append(s)
    return "\n".join(keep)


def build_sample(test: Entity, graph: CodeGraph, gateway: Gateway, seed: int = 0) -> UtilizationSample | FilterVerdict:
    out = decompose_test(test, graph, gateway, seed)
    if isinstance(out, FilterVerdict):
        return out
    functional, assertions, instruction, entry = out
    context = closure_bundle(graph, [test.id], exclude=[test.id])
    return UtilizationSample(
        sample_id("utilization", test.id), test.id, functional, assertions, instruction, entry, context, graph.language.value
    )


def _patch_summary(before: str, after: str) -> str:
    diff = list(difflib.unified_diff(before.splitlines(), after.splitlines(), lineterm="", n=0))
    added = sum(1 for d in diff if d.startswith("+") and not d.startswith("+++"))
    removed = sum(1 for d in diff if d.startswith("-") and not d.startswith("---"))
    return f"+{added} -{removed} lines"


def compile_and_repair(
    sample: UtilizationSample, sandbox: SandboxConfig, gateway: Gateway, max_iters: int = 3, seed: int = 0, hints: dict | None = None
) -> UtilizationSample:
    """Build functional code + assertions; on failure ask for a patch.

    At most ``max_iters`` repair requests. Every failed build is logged in
    ``repair_log``. Exhaustion sets ``rejected`` and keeps the last
    diagnostic.
    """
    cur = replace(sample, repair_log=list(sample.repair_log))
    template = load_prompt("repair_v1")
    for it in range(max_iters + 1):
        out = run_attempt(cur.id, cur.functional_code, cur.assertions, sandbox, it + 1, compile_only=True)
        if out.compiled:
            return cur
        cur.last_diagnostic = out.stderr
        if it == max_iters:
            break
        prompt = template.render(code=cur.functional_code, diagnostics=out.stderr[-4000:])
        req = GenRequest(
            Role.REPAIR,
            prompt,
            cur.context,
            gateway.sampling(seed, 1),
            hints={"code": cur.functional_code, "diagnostics": out.stderr, "language": cur.language, **(hints or {})},
        )
        try:
            reply = gateway.generate(req).content
        except GatewayError as exc:
            cur.repair_log.append(RepairStep(it + 1, out.stderr_digest, f"gateway error: {exc}"))
            continue
        if not _FENCE.search(reply):
            cur.repair_log.append(RepairStep(it + 1, out.stderr_digest, "no patch"))
            continue
        patched = extract_code(reply).strip("\n") + "\n"
        cur.repair_log.append(RepairStep(it + 1, out.stderr_digest, _patch_summary(cur.functional_code, patched)))
        cur.functional_code = patched
    cur.rejected = "compile: repair budget exhausted"
    return cur


def execution_filter(sample: UtilizationSample, sandbox: SandboxConfig, code: str | None = None) -> FilterVerdict:
    """Compile and run; pass iff every assertion holds within the time limit."""
    out = run_attempt(sample.id, code if code is not None else sample.functional_code, sample.assertions, sandbox)
    if out.tests_passed:
        return FilterVerdict.ok(sample.id, "execution")
    reason = "compile-error" if not out.compiled and out.reason != "timeout" else out.reason
    return FilterVerdict.fail(sample.id, "execution", reason, out.stderr[-500:])


def utilization_instruction(sample: UtilizationSample) -> str:
    return f"Implement `{sample.entry}` for this codebase.\n\n{sample.instruction}\n\nIt must make these checks pass:\n{sample.assertions}"


def tests_for_utilization(graph: CodeGraph, matcher: TestMatcher | None = None) -> list[Entity]:
    return (matcher or TestMatcher()).tests(graph)


def sandbox_for_repo(graph: CodeGraph, repo: str | Path, include_roots: list[str], matcher: TestMatcher | None = None, **kw) -> SandboxConfig:
    """Sandbox config wired to a repository: include dirs, link sources, path.

    C++ link sources are the repository's implementation files that define
    no ``main`` and are not test files.
    """
    root = Path(repo).resolve()
    matcher = matcher or TestMatcher()
    if graph.language.value == "python":
        return SandboxConfig("python", python_path=[str(root / r) for r in include_roots], **kw)
    mains = {e.file_path for e in graph.entities.values() if e.kind is EntityKind.FUNCTION and e.name == "main"}
    sources = []
    for f in graph.files():
        p = f.file_path
        if Path(p).suffix in (".cc", ".cpp", ".cxx", ".c++") and p not in mains:
            if not any(matcher.is_test(e) for e in graph.entities.values() if e.file_path == p):
                sources.append(str(root / p))
    includes = [str(root / r) for r in include_roots] + [str(root)]
    return SandboxConfig("cpp", include_dirs=includes, sources=sources, **kw)


def digest_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


HEADER_SUFFIXES = (".h", ".hh", ".hpp", ".hxx", ".h++")


def header_hints(graph: CodeGraph, include_roots: list[str]) -> dict[str, dict[str, str]]:
    """Repair hints: short name -> include path for entities declared in headers.

    The path is relative to the longest matching include root. Names defined
    in more than one header are left out.
    """
    if graph.language.value != "cpp":
        return {}
    seen: dict[str, set[str]] = {}
    for e in graph.entities.values():
        if e.kind is EntityKind.FILE or not e.file_path.endswith(HEADER_SUFFIXES):
            continue
        if e.kind is EntityKind.METHOD:
            continue
        rel = e.file_path
        best = None
        for r in include_roots:
            r = r.strip("/")
            if r in ("", ".") or rel.startswith(r + "/"):
                cand = rel if r in ("", ".") else rel[len(r) + 1 :]
                if best is None or len(cand) < len(best):
                    best = cand
        seen.setdefault(e.short_name, set()).add(best or rel)
    return {"headers": {k: next(iter(v)) for k, v in sorted(seen.items()) if len(v) == 1}}
