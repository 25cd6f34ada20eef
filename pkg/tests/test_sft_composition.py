import json

import pytest

from repocorpus.graph import Diagnostic
from repocorpus.llm import Gateway, GatewayConfig, GatewayError, ScriptedClient
from repocorpus.llm.synthetic import SyntheticClient
from repocorpus.sft.codecheck import check_calls, missing_context_symbols
from repocorpus.sft.common import TestMatcher, closure_bundle
from repocorpus.sft.composition import (
    CompositionTask,
    GradingCriterion,
    TaskFormat,
    consistency_filter_stage2,
    generate_tasks,
    mine_combinations,
    rule_filter_stage1,
)

from fixtures.stage1_cases import CASES

from helpers import add_fn, file_graph


def named(graph, name):
    return next(e for e in graph.entities.values() if e.name == name)


def combo_for(graph, test_name):
    t = named(graph, test_name)
    return next(c for c in mine_combinations(graph) if c.source_test == t.id)


def reply(statement="Do it", answer="```cpp\nlong x = shop::to_cents(1);\n```", entities=("shop::to_cents",)):
    crit = [{"point": f"uses {e}", "entity": e} for e in entities]
    return json.dumps({"statement": statement, "reference_answer": answer, "grading_criteria": crit})


# -- mining -----------------------------------------------------------------------


def test_combination_apis_come_from_call_edges(cpp_graph):
    c = combo_for(cpp_graph, "test_discount")
    names = sorted(cpp_graph[a].name for a in c.apis)
    assert "shop::apply_discount" in names
    calls = {r.dst for r in cpp_graph.out_edges(c.source_test)}
    assert set(c.apis) <= calls
    assert set(c.apis) <= set(c.closure)


def test_definitions_preferred_over_declarations(cpp_graph):
    c = combo_for(cpp_graph, "test_cart_total")
    assert not any(cpp_graph[a].declaration for a in c.apis)
    assert len({cpp_graph[a].name for a in c.apis}) == len(c.apis)


def test_two_tests_sharing_an_api_give_two_combinations(cpp_graph):
    a, b = combo_for(cpp_graph, "test_cart_total"), combo_for(cpp_graph, "test_discount")
    assert a.id != b.id and set(a.apis) & set(b.apis)


def test_builtin_only_test_excluded():
    g = file_graph({"tests/test_x.py": "def test_only_builtins():\n    assert len('a') == 1\n"}, language="python")
    add_fn(g, "tests/test_x.py", "tests.test_x.test_only_builtins")
    assert mine_combinations(g) == []


def test_no_tests_warns():
    g = file_graph({"src/a.py": "def f():\n    pass\n"}, language="python")
    add_fn(g, "src/a.py", "a.f")
    diags: list[Diagnostic] = []
    assert mine_combinations(g, diagnostics=diags) == []
    assert diags and diags[0].tag == "warning"


def test_matcher_needs_test_path_and_name():
    m = TestMatcher()
    g = file_graph({"src/a.cpp": "", "tests/b.cpp": ""})
    assert m.is_test(g[add_fn(g, "tests/b.cpp", "test_thing")])
    assert not m.is_test(g[add_fn(g, "tests/b.cpp", "helper")])
    assert not m.is_test(g[add_fn(g, "src/a.cpp", "test_other")])


# -- generation -------------------------------------------------------------------


def test_programming_difficulty_two_gives_two_criteria(cpp_graph):
    c = combo_for(cpp_graph, "test_add_money")
    g = Gateway(ScriptedClient({"task_design": [reply(entities=("shop::to_cents", "shop::add"))]}))
    r = generate_tasks(c, cpp_graph, [TaskFormat.PROGRAMMING], (2, 2), g)
    (t,) = r.tasks
    assert t.difficulty == 2 and len(t.grading_criteria) == 2
    assert t.prompt_version.startswith("task_design_v1@")
    assert set(c.apis) <= t.context.entity_ids


def test_empty_formats_on_fixture(cpp_graph):
    r = generate_tasks(combo_for(cpp_graph, "test_add_money"), cpp_graph, [], (1, 4), Gateway(ScriptedClient({})))
    assert r.tasks == [] and r.requested == 0


def test_missing_reference_answer_is_parse_failure(cpp_graph):
    bad = json.dumps({"statement": "s", "grading_criteria": [{"point": "p", "entity": "shop::add"}]})
    client = ScriptedClient({"task_design": [bad]})
    r = generate_tasks(combo_for(cpp_graph, "test_add_money"), cpp_graph, ["programming"], (1, 1), Gateway(client, GatewayConfig(attempts=3)))
    assert r.tasks == []
    (v,) = r.verdicts
    assert v.reason == "parse-failure" and "reference_answer" in v.detail
    assert len(client.calls) == 3


def test_malformed_then_good_reply_is_retried(cpp_graph):
    g = Gateway(ScriptedClient({"task_design": ["not json", reply()]}))
    r = generate_tasks(combo_for(cpp_graph, "test_add_money"), cpp_graph, ["programming"], (1, 1), g)
    assert len(r.tasks) == 1


def test_criteria_must_name_context_entities(cpp_graph):
    g = Gateway(ScriptedClient({"task_design": [reply(entities=("shop::Cart::total",))]}), GatewayConfig(attempts=1))
    r = generate_tasks(combo_for(cpp_graph, "test_add_money"), cpp_graph, ["programming"], (1, 1), g)
    assert r.verdicts[0].reason == "parse-failure" and "not in the context" in r.verdicts[0].detail


def test_gateway_exhaustion_skips(cpp_graph):
    g = Gateway(ScriptedClient({"task_design": [GatewayError("down")]}))
    r = generate_tasks(combo_for(cpp_graph, "test_add_money"), cpp_graph, ["qa", "prog"], (1, 1), g)
    assert [v.reason for v in r.verdicts] == ["gateway", "gateway"]


def test_bad_difficulty_range(cpp_graph):
    with pytest.raises(ValueError):
        generate_tasks(combo_for(cpp_graph, "test_add_money"), cpp_graph, ["qa"], (3, 1), Gateway(ScriptedClient({})))


def test_criteria_context_contains_implementations(cpp_graph):
    g = Gateway(SyntheticClient(0), GatewayConfig())
    for c in mine_combinations(cpp_graph):
        for t in generate_tasks(c, cpp_graph, list(TaskFormat), (1, 3), g).tasks:
            bodies = {i.entity_id: i.text for i in t.context.items}
            for crit in t.grading_criteria:
                assert bodies[crit.entity_id] == cpp_graph[crit.entity_id].body_text


def test_format_aliases():
    assert TaskFormat.parse("qa") is TaskFormat.QUESTION_ANSWER
    assert TaskFormat.parse("blank") is TaskFormat.FILL_IN_BLANK
    assert TaskFormat.parse("programming") is TaskFormat.PROGRAMMING
    with pytest.raises(ValueError):
        TaskFormat.parse("essay")


# -- stage 1 ---------------------------------------------------------------------------


def _context_ids(graph):
    m = TestMatcher()
    return {e.id for e in graph.entities.values() if not m.is_test(e)}


@pytest.mark.parametrize("language,code,expected", CASES, ids=[f"case{i:02d}" for i in range(len(CASES))])
def test_stage1_suite(language, code, expected, cpp_graph, py_graph):
    graph = cpp_graph if language == "cpp" else py_graph
    found = check_calls(code, language, graph, _context_ids(graph))
    assert (found[0].reason if found else None) == expected


def _task(graph, answer, fmt=TaskFormat.PROGRAMMING, apis=("shop::add",)):
    ids = [named(graph, a).id for a in apis]
    ctx = closure_bundle(graph, ids)
    crit = tuple(GradingCriterion("p", i, graph[i].name) for i in ids)
    return CompositionTask("t", "c", ids[0], fmt, len(ids), "s", answer, crit, ctx, "v")


def test_stage1_spec_examples(cpp_graph):
    assert rule_filter_stage1(_task(cpp_graph, "Money m = add(Money{1}, Money{2});"), cpp_graph)
    v = rule_filter_stage1(_task(cpp_graph, "Money m = add(Money{1});"), cpp_graph)
    assert not v and v.reason == "arity-mismatch"
    v = rule_filter_stage1(_task(cpp_graph, "frobnicate();"), cpp_graph)
    assert v.reason == "unknown-entity"


def test_stage1_call_outside_context(cpp_graph):
    v = rule_filter_stage1(_task(cpp_graph, "Money m = scale(Money{1}, 2);"), cpp_graph)
    assert v.reason == "unknown-entity" and "not in the context" in v.detail


def test_stage1_qa_passes_vacuously(cpp_graph):
    assert rule_filter_stage1(_task(cpp_graph, "prose with add(1) in it", TaskFormat.QUESTION_ANSWER), cpp_graph)


def test_stage1_unparseable(py_graph):
    task = _task(py_graph, "def (:", apis=("inventory.pricing.with_tax",))
    v = rule_filter_stage1(task, py_graph)
    assert v.reason == "parse"


# -- stage 2 ---------------------------------------------------------------------------


def test_stage2_identical_passes(cpp_graph):
    t = _task(cpp_graph, "Money m = add(Money{1}, Money{2});")
    assert consistency_filter_stage2(t, t.reference_answer, Gateway(ScriptedClient({})), cpp_graph)


def test_stage2_rule_recheck_catches_bad_call(cpp_graph):
    t = _task(cpp_graph, "Money m = add(Money{1}, Money{2});")
    client = ScriptedClient({"judge": ["VERDICT: consistent\nRATIONALE: same"]})
    v = consistency_filter_stage2(t, "Adding is easy:\n```cpp\nMoney m = add_all(Money{1}, Money{2});\n```", Gateway(client), cpp_graph)
    assert not v and v.reason == "unknown-entity"
    assert client.calls == []  # judge never consulted


def test_stage2_judge_inconsistent(cpp_graph):
    t = _task(cpp_graph, "Money m = add(Money{1}, Money{2});")
    g = Gateway(ScriptedClient({"judge": ["VERDICT: inconsistent\nRATIONALE: different values"]}))
    v = consistency_filter_stage2(t, "Money m = add(Money{2}, Money{2});", g, cpp_graph)
    assert not v and v.reason == "inconsistent"


def test_stage2_malformed_judge_fails_closed(cpp_graph):
    t = _task(cpp_graph, "Money m = add(Money{1}, Money{2});")
    g = Gateway(ScriptedClient({"judge": ["sure, looks fine"]}))
    assert not consistency_filter_stage2(t, "Money m = add(Money{2}, Money{2});", g, cpp_graph)


def test_missing_context_symbols(cpp_graph):
    ctx = closure_bundle(cpp_graph, [named(cpp_graph, "shop::add").id])
    assert missing_context_symbols("Money m = add(Money{1}, Money{2});", "cpp", cpp_graph, ctx.entity_ids) == []
    assert missing_context_symbols("long c = to_cents(1);", "cpp", cpp_graph, ctx.entity_ids) == ["to_cents"]
