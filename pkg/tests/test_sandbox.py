import random
import shutil
import threading
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repocorpus.sandbox import (
    ExecOutcome,
    InsufficientAttemptsError,
    Limits,
    SandboxConfig,
    TaskPackage,
    ToolchainMissingError,
    compilation_at_k,
    group_outcomes,
    load_attempts,
    load_tasks,
    pass_at_k,
    run_attempt,
    write_task,
)
from repocorpus.sandbox.runner import REGISTRY, AttemptJob, run_attempts

needs_gxx = pytest.mark.skipif(shutil.which("g++") is None, reason="g++ not installed")

# F = compile failure, C = compiled but tests failed, P = passed
HAND_TABLE = [
    "PPP", "FPC", "FFF", "CCC", "CPF", "FFP",
    "FCP", "PFF", "CFC", "FFC", "FCC", "CCP",
]  # fmt: skip
# worked out by hand from the table above (first-k attempts, at least one hit)
HAND_COMPILE = {1: Fraction(6, 12), 2: Fraction(9, 12), 3: Fraction(11, 12)}
HAND_PASS = {1: Fraction(2, 12), 2: Fraction(4, 12), 3: Fraction(7, 12)}


def outcomes_from(table):
    out = []
    for t, row in enumerate(table):
        for i, c in enumerate(row, start=1):
            out.append(ExecOutcome(f"t{t:02d}", i, c in "CP", c == "P"))
    return group_outcomes(out)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_hand_table(k):
    g = outcomes_from(HAND_TABLE)
    assert compilation_at_k(g, k) == HAND_COMPILE[k]
    assert pass_at_k(g, k) == HAND_PASS[k]


def test_small_examples():
    assert compilation_at_k(outcomes_from(["C", "F"]), 1) == Fraction(1, 2)
    assert compilation_at_k(outcomes_from(["FC"]), 2) == 1
    assert compilation_at_k(outcomes_from(["FC"]), 1) == 0
    assert pass_at_k(outcomes_from(["P", "P", "P", "F"]), 1) == Fraction(3, 4)
    assert pass_at_k(outcomes_from(["FC", "CF"]), 2) == 0
    assert pass_at_k(outcomes_from(["FP"]), 2) == 1


def test_attempt_order_not_list_order():
    outs = [ExecOutcome("t", 2, True, True), ExecOutcome("t", 1, False, False)]
    assert pass_at_k(group_outcomes(outs), 1) == 0


def test_insufficient_attempts():
    with pytest.raises(InsufficientAttemptsError):
        pass_at_k(outcomes_from(["PP", "P"]), 2)
    with pytest.raises(ValueError):
        pass_at_k(outcomes_from(["P"]), 0)
    with pytest.raises(ValueError):
        pass_at_k({}, 1)


def test_thousand_random_tables():
    rng = random.Random(7)
    for _ in range(1000):
        n = rng.randint(1, 15)
        attempts = rng.randint(1, 6)
        table = ["".join(rng.choice("FCP") for _ in range(attempts)) for _ in range(n)]
        g = outcomes_from(table)
        prev_c = prev_p = Fraction(0)
        for k in range(1, attempts + 1):
            c, p = compilation_at_k(g, k), pass_at_k(g, k)
            assert p <= c
            assert c >= prev_c and p >= prev_p
            prev_c, prev_p = c, p


@settings(max_examples=200, deadline=None)
@given(st.lists(st.text("FCP", min_size=3, max_size=3), min_size=1, max_size=12))
def test_properties_hypothesis(table):
    g = outcomes_from(table)
    vals = [(compilation_at_k(g, k), pass_at_k(g, k)) for k in (1, 2, 3)]
    assert all(p <= c for c, p in vals)
    assert [c for c, _ in vals] == sorted(c for c, _ in vals)


def test_outcome_invariant():
    with pytest.raises(ValueError):
        ExecOutcome("t", 1, False, True)


# -- execution ---------------------------------------------------------------------

CPP_OK = "int twice(int x) { return 2 * x; }"
CPP_TESTS = "#include <cassert>\nint main() { assert(twice(2) == 4); return 0; }"


@needs_gxx
def test_cpp_pass():
    o = run_attempt("hello", CPP_OK, CPP_TESTS, SandboxConfig("cpp"))
    assert o.compiled and o.tests_passed and o.reason == "ok"


@needs_gxx
def test_cpp_syntax_error():
    o = run_attempt("syn", "int twice(int x) { return 2 * x }", CPP_TESTS, SandboxConfig("cpp"))
    assert not o.compiled and o.reason == "compile-error"
    assert "<work>" in o.stderr or "candidate.cpp" in o.stderr


@needs_gxx
def test_cpp_failing_assertion():
    o = run_attempt("bad", "int twice(int x) { return 3 * x; }", CPP_TESTS, SandboxConfig("cpp"))
    assert o.compiled and not o.tests_passed and o.reason == "assertion"


@needs_gxx
def test_cpp_timeout():
    code = "int twice(int x) { while (true) {} return x; }"
    o = run_attempt("loop", code, CPP_TESTS, SandboxConfig("cpp", limits=Limits(wall_seconds=3)))
    assert o.compiled and not o.tests_passed and o.reason == "timeout"


def test_python_phases():
    cfg = SandboxConfig("python")
    ok = run_attempt("p", "def twice(x):\n    return 2 * x\n", "def test_twice():\n    assert twice(2) == 4\n", cfg)
    assert ok.tests_passed
    bad_import = run_attempt("p", "import not_a_module_xyz\n", "def test_a():\n    pass\n", cfg)
    assert not bad_import.compiled
    syntax = run_attempt("p", "def f(:\n", "def test_a():\n    pass\n", cfg)
    assert not syntax.compiled
    failing = run_attempt("p", "def twice(x):\n    return x\n", "def test_twice():\n    assert twice(2) == 4\n", cfg)
    assert failing.compiled and not failing.tests_passed and failing.reason == "assertion"


def test_stderr_digest_reproducible():
    cfg = SandboxConfig("python")
    a = run_attempt("p", "def f(:\n", "", cfg)
    b = run_attempt("p", "def f(:\n", "", cfg)
    assert a.stderr_digest == b.stderr_digest != ""


def test_missing_toolchain():
    with pytest.raises(ToolchainMissingError):
        run_attempt("x", "", "", SandboxConfig("cpp", cxx="no-such-compiler-xyz"))


def test_concurrent_attempts_never_share_directories(monkeypatch):
    seen = []
    lock = threading.Lock()
    orig = REGISTRY.acquire

    def spy(path):
        with lock:
            seen.append(path)
        orig(path)

    monkeypatch.setattr(REGISTRY, "acquire", spy)
    jobs = [AttemptJob(f"t{i}", 1, "def f():\n    return 1\n", "def test_f():\n    assert f() == 1\n") for i in range(8)]
    outs = run_attempts(jobs, SandboxConfig("python", workers=4))
    assert all(o.tests_passed for o in outs)
    assert [o.task_id for o in outs] == [j.task_id for j in jobs]
    assert len(set(seen)) == len(seen) == 8
    assert not REGISTRY.active


def test_task_package_roundtrip(tmp_path):
    t = TaskPackage("t1", "python", "double a number", "def twice(x):\n    return 2 * x\n", "def test_t():\n    assert twice(3) == 6\n", "twice")
    write_task(tmp_path, t)
    assert load_tasks(tmp_path) == {"t1": t}
    (tmp_path / "a.jsonl").write_text('{"task_id": "t1", "attempt_index": 1, "code": "x"}\n')
    assert load_attempts(tmp_path / "a.jsonl")[0]["code"] == "x"
    (tmp_path / "b.jsonl").write_text('{"task_id": "t1"}\n')
    with pytest.raises(ValueError):
        load_attempts(tmp_path / "b.jsonl")
