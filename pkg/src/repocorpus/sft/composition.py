"""Compositional API reasoning tasks mined from a repository's own tests."""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from enum import Enum

from ..context import ContextBundle
from ..graph import CodeGraph, Diagnostic, EntityKind, RelationKind, dependency_closure
from ..llm import Gateway, GatewayError, GenRequest, Role
from ..verdict import FilterVerdict
from .codecheck import SnippetParseError, check_calls
from .common import TestMatcher, closure_bundle, sample_id
from .prompts import load_prompt

log = logging.getLogger(__name__)


class TaskFormat(str, Enum):
    QUESTION_ANSWER = "question_answer"
    FILL_IN_BLANK = "fill_in_blank"
    PROGRAMMING = "programming"

    @classmethod
    def parse(cls, text: str) -> TaskFormat:
        return FORMAT_ALIASES.get(text.strip(), None) or cls(text.strip())


FORMAT_ALIASES = {"qa": TaskFormat.QUESTION_ANSWER, "blank": TaskFormat.FILL_IN_BLANK, "prog": TaskFormat.PROGRAMMING}

FORMAT_RULES = {
    TaskFormat.QUESTION_ANSWER: "Ask a question whose answer explains how the APIs work together. The reference answer is prose.",
    TaskFormat.FILL_IN_BLANK: "Show code with one or more blanks written as ____. The reference answer is the code that fills the blanks.",
    TaskFormat.PROGRAMMING: "Ask for a complete function. The reference answer is the full implementation.",
}


@dataclass(frozen=True)
class ApiCombination:
    id: str
    source_test: str
    apis: tuple[str, ...]
    closure: tuple[str, ...]


@dataclass(frozen=True)
class GradingCriterion:
    point: str
    entity_id: str
    entity_name: str

    def to_record(self) -> dict:
        return {"point": self.point, "entity_id": self.entity_id, "entity": self.entity_name}


@dataclass
class CompositionTask:
    id: str
    combination: str
    source_test: str
    format: TaskFormat
    difficulty: int
    statement: str
    reference_answer: str
    grading_criteria: tuple[GradingCriterion, ...]
    context: ContextBundle
    prompt_version: str
    apis: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if len(self.grading_criteria) != self.difficulty:
            raise ValueError("grading criteria count must equal difficulty")


@dataclass
class CompositionResult:
    tasks: list[CompositionTask] = field(default_factory=list)
    verdicts: list[FilterVerdict] = field(default_factory=list)  # skips / parse failures
    requested: int = 0


def mine_combinations(
    graph: CodeGraph, matcher: TestMatcher | None = None, diagnostics: list[Diagnostic] | None = None
) -> list[ApiCombination]:
    """One combination per test function with at least one resolved in-repo call.

    When a call resolved to both a declaration and its definition, the
    definition stands for the API. Tests that only call builtins are skipped.
    """
    matcher = matcher or TestMatcher()
    tests = matcher.tests(graph)
    if not tests and diagnostics is not None:
        diagnostics.append(Diagnostic("", 0, "warning", "no test functions matched; composition data is empty"))
    out = []
    for t in tests:
        targets = {graph[r.dst] for r in graph.out_edges(t.id, [RelationKind.CALL])}
        targets = {e for e in targets if not matcher.is_test(e)}
        by_name: dict[str, list] = {}
        for e in targets:
            by_name.setdefault(e.name, []).append(e)
        apis = []
        for name in sorted(by_name):
            group = sorted(by_name[name], key=lambda e: (e.declaration, e.file_path, e.span.start))
            apis.append(group[0].id)
        if not apis:
            continue
        closure: dict[str, None] = {}
        for a in apis:
            for e in dependency_closure(graph, a):
                closure.setdefault(e.id, None)
        out.append(ApiCombination(sample_id("combination", t.id), t.id, tuple(apis), tuple(closure)))
    return out


_JSON_BLOCK = re.compile(r"\{.*\}", re.S)


def _parse_reply(text: str) -> dict:
    m = _JSON_BLOCK.search(text)
    if not m:
        raise ValueError("no JSON object in reply")
    obj = json.loads(m.group(0))
    if not isinstance(obj, dict):
        raise ValueError("reply is not a JSON object")
    return obj


def _criteria(obj: dict, graph: CodeGraph, context: ContextBundle, difficulty: int) -> tuple[GradingCriterion, ...]:
    raw = obj.get("grading_criteria")
    if not isinstance(raw, list):
        raise ValueError("grading_criteria missing")
    if len(raw) != difficulty:
        raise ValueError(f"expected {difficulty} grading criteria, got {len(raw)}")
    ctx = {graph[i].name: i for i in sorted(context.entity_ids, key=lambda i: (graph[i].declaration, i))}
    out = []
    for c in raw:
        if not isinstance(c, dict) or not str(c.get("point", "")).strip():
            raise ValueError("grading criterion needs a point")
        name = str(c.get("entity", "")).strip()
        if name not in ctx:
            raise ValueError(f"grading criterion entity {name!r} is not in the context")
        out.append(GradingCriterion(str(c["point"]).strip(), ctx[name], name))
    return tuple(out)


def _api_listing(graph: CodeGraph, apis: tuple[str, ...]) -> str:
    lines = []
    for a in apis:
        e = graph[a]
        sig = f"({', '.join(e.signature.params)})" if e.signature else ""
        lines.append(f"- {e.kind.value} {e.name}{sig}  [{e.file_path}:{e.span.start}]")
    return "\n".join(lines)


def generate_tasks(
    comb: ApiCombination,
    graph: CodeGraph,
    formats: list[TaskFormat],
    difficulty_range: tuple[int, int],
    gateway: Gateway,
    seed: int = 0,
) -> CompositionResult:
    """Ask the gateway for one task per (format, difficulty).

    Malformed replies are retried up to K times; after that the request is
    skipped with a ``parse-failure`` verdict. Gateway exhaustion gives a
    ``gateway`` skip.
    """
    lo, hi = difficulty_range
    if lo < 1 or hi < lo:
        raise ValueError("difficulty range must satisfy 1 <= lo <= hi")
    prompt = load_prompt("task_design_v1")
    test = graph[comb.source_test]
    context = closure_bundle(graph, comb.apis)
    result = CompositionResult()
    ordered_ctx = [graph[i].name for i in comb.closure]
    for fmt in formats:
        fmt = fmt if isinstance(fmt, TaskFormat) else TaskFormat.parse(fmt)
        for difficulty in range(lo, hi + 1):
            result.requested += 1
            tid = sample_id("composition", comb.id, fmt.value, difficulty)
            text = prompt.render(
                difficulty=difficulty,
                format=fmt.value,
                format_rules=FORMAT_RULES[fmt],
                source_test=test.name,
                api_list=_api_listing(graph, comb.apis),
                test_body=test.body_text,
            )
            hints = {
                "format": fmt.value,
                "difficulty": difficulty,
                "language": graph.language.value,
                "test_name": test.name,
                "test_body": test.body_text,
                "apis": [graph[a].name for a in comb.apis],
                "closure": ordered_ctx,
            }
            req = GenRequest(Role.TASK_DESIGN, text, context, gateway.sampling(seed), hints=hints)
            task = None
            last_err = ""
            try:
                for attempt in range(1, req.sampling.attempts + 1):
                    reply = gateway.generate(req, attempt).content
                    try:
                        obj = _parse_reply(reply)
                        statement = str(obj.get("statement", "")).strip()
                        answer = str(obj.get("reference_answer", "")).strip()
                        if not statement:
                            raise ValueError("statement missing")
                        if not answer:
                            raise ValueError("reference_answer missing")
                        crit = _criteria(obj, graph, context, difficulty)
                    except (ValueError, json.JSONDecodeError) as exc:
                        last_err = str(exc)
                        continue
                    task = CompositionTask(
                        tid, comb.id, comb.source_test, fmt, difficulty, statement, answer, crit, context, prompt.version, comb.apis
                    )
                    break
            except GatewayError as exc:
                result.verdicts.append(FilterVerdict.fail(tid, "task_design", "gateway", str(exc)))
                continue
            if task is None:
                result.verdicts.append(FilterVerdict.fail(tid, "task_design", "parse-failure", last_err))
            else:
                result.tasks.append(task)
    return result


_FENCE = re.compile(r"```[A-Za-z0-9+_-]*\n(.*?)```", re.S)


def extract_code(text: str) -> str:
    """First fenced code block, or the whole text when there is none."""
    m = _FENCE.search(text)
    return m.group(1) if m else text


def rule_filter_stage1(task: CompositionTask, graph: CodeGraph, context: ContextBundle | None = None, code: str | None = None) -> FilterVerdict:
    """Existence, invocation-prefix and arity checks on the reference code.

    Question-answer tasks pass vacuously. ``code`` overrides the reference
    answer (stage 2 re-runs this check on a generated response).
    """
    stage = "stage1" if code is None else "stage2-rules"
    if task.format is TaskFormat.QUESTION_ANSWER:
        return FilterVerdict.ok(task.id, stage, "no code to check")
    context = context or task.context
    src = extract_code(code if code is not None else task.reference_answer)
    try:
        violations = check_calls(src, graph.language.value, graph, context.entity_ids)
    except SnippetParseError as exc:
        return FilterVerdict.fail(task.id, stage, "parse", str(exc))
    if violations:
        v = violations[0]
        return FilterVerdict.fail(task.id, stage, v.reason, v.detail)
    return FilterVerdict.ok(task.id, stage)


def consistency_filter_stage2(
    task: CompositionTask, response: str, gateway: Gateway, graph: CodeGraph, seed: int = 0
) -> FilterVerdict:
    """Rule re-check on the response's code, then a fail-closed judge call."""
    if not response.strip():
        return FilterVerdict.fail(task.id, "stage2", "empty-response")
    rules = rule_filter_stage1(task, graph, code=response)
    if not rules:
        return FilterVerdict.fail(task.id, "stage2", rules.reason, rules.detail)
    verdict = gateway.judge_consistency(task.reference_answer, response, seed=seed, question=task.statement)
    if not verdict.consistent:
        return FilterVerdict.fail(task.id, "stage2", "inconsistent", verdict.rationale)
    return FilterVerdict.ok(task.id, "stage2", verdict.rationale)
