"""Deterministic offline stand-in for the generation models.

Replies are built from the structured ``hints`` each caller attaches to its
request, so the full pipeline runs without network access. Output depends
only on the seed and the request digest.
"""

from __future__ import annotations

import json
import random
import re

from .types import Completion, GenRequest, Role

PARAPHRASE_FRAMES = (
    "In this codebase, {s}.",
    "The source shows that {s}.",
    "It holds that {s}.",
    "According to the repository, {s}.",
    "Reading the code, one finds that {s}.",
    "As implemented, {s}.",
    "Looking at the project, {s}.",
    "One can confirm that {s}.",
)

_CPP_ASSERT = re.compile(r"\b(assert|static_assert|ASSERT_\w+|EXPECT_\w+|REQUIRE\w*|CHECK\w*)\s*\(")
_CPP_DECL = re.compile(r"^\s*(?:const\s+)?([A-Za-z_][\w:<>, ]*?(?:\s*[*&])?)\s+([A-Za-z_]\w*)\s*(?:[{(=;\[])")
_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_]*|\d+|\S")
_NOT_DECLARED = re.compile(r"[‘'`]([A-Za-z_][\w:]*)[’'`] (?:was not declared in this scope|does not name a type|is not a member of|has not been declared)")
_DID_YOU_FORGET = re.compile(r"did you forget to [‘'`]#include (<[^>]+>|\"[^\"]+\")[’'`]")


def _tokens(text: str) -> set[str]:
    return set(_WORD.findall(text))


def _norm(text: str) -> str:
    return " ".join(text.split())


def _fence(code: str, language: str) -> str:
    return f"```{language}\n{code.rstrip()}\n```"


def _body_lines(test_body: str, language: str) -> list[str]:
    lines = test_body.splitlines()
    if language == "cpp":
        text = test_body[test_body.index("{") + 1 : test_body.rindex("}")]
        return [ln.strip() for ln in text.splitlines() if ln.strip()]
    return [ln.strip() for ln in lines[1:] if ln.strip()]


def _is_assert(line: str, language: str) -> bool:
    if language == "cpp":
        return bool(_CPP_ASSERT.search(line))
    return line.startswith("assert ") or line.startswith("assert(") or ".assert" in line or line.startswith("with pytest.raises")


def _declared(line: str, language: str) -> tuple[str, str] | None:
    """(type, variable) declared by one setup line, type '' for Python."""
    if language == "cpp":
        m = _CPP_DECL.match(line)
        if m and m.group(1) not in ("return", "delete", "throw"):
            return m.group(1).strip(), m.group(2)
        return None
    m = re.match(r"^([A-Za-z_]\w*)\s*(?::[^=]+)?=(?!=)", line)
    return ("", m.group(1)) if m else None


def decompose(hints: dict) -> dict | None:
    """Split a test into builder + checks, or None when it has no setup."""
    language = hints["language"]
    entry = hints["entry"]
    lines = _body_lines(hints["test_body"], language)
    setup = [ln for ln in lines if not _is_assert(ln, language)]
    checks = [ln for ln in lines if _is_assert(ln, language)]
    if not setup or not checks:
        return None
    decls = [d for d in (_declared(ln, language) for ln in setup) if d]
    used = [d for d in decls if any(re.search(rf"\b{re.escape(d[1])}\b", c) for c in checks)]
    if len(used) != 1:
        return None
    vtype, var = used[0]
    preamble = hints.get("preamble", "")
    if language == "cpp":
        fn = "\n".join([f"{vtype} {entry}() {{", *(f"    {s}" for s in setup), f"    return {var};", "}"])
        functional = f"{preamble}\n\n{fn}\n" if preamble else fn + "\n"
        asserts = "\n".join(["int main() {", f"    {vtype} {var} = {entry}();", *(f"    {c}" for c in checks), "    return 0;", "}"]) + "\n"
    else:
        fn = "\n".join([f"def {entry}():", *(f"    {s}" for s in setup), f"    return {var}"])
        functional = f"{preamble}\n\n\n{fn}\n" if preamble else fn + "\n"
        test = hints.get("test_short", "test_case")
        asserts = "\n".join([f"def {test}():", f"    {var} = {entry}()", *(f"    {c}" for c in checks)]) + "\n"
    what = "object" if language == "python" else vtype
    instruction = (
        f"Write {entry}, which builds and returns the {what} `{var}` exactly as the original test prepares it, "
        f"using the repository's own API ({len(setup)} setup step{'s' if len(setup) != 1 else ''})."
    )
    return {"functional_code": functional, "assertions": asserts, "instruction": instruction, "entry": entry}


def repair(hints: dict) -> str:
    """Add the includes the compiler or the header map points at."""
    code = hints["code"]
    diagnostics = hints.get("diagnostics", "")
    headers: dict[str, str] = hints.get("headers", {})
    wanted: list[str] = []
    for m in _DID_YOU_FORGET.finditer(diagnostics):
        wanted.append(m.group(1))
    for m in _NOT_DECLARED.finditer(diagnostics):
        name = m.group(1).split("::")[-1]
        # an unknown namespace hides its members; try the names it qualifies
        for cand in [name, *re.findall(rf"\b{re.escape(name)}::(\w+)", code)]:
            if cand in headers:
                wanted.append(f'"{headers[cand]}"')
    present = set(re.findall(r"#include\s*([<\"][^>\"]+[>\"])", code))
    adds = []
    for w in wanted:
        if w not in present and w not in adds:
            adds.append(w)
    if not adds:
        return _fence(code, "cpp")
    return _fence("\n".join(f"#include {a}" for a in adds) + "\n" + code, "cpp")


def design_task(hints: dict, rng: random.Random) -> str:
    fmt = hints["format"]
    difficulty = int(hints["difficulty"])
    language = hints["language"]
    apis: list[str] = list(hints["apis"])
    closure: list[str] = list(hints.get("closure", []))
    points = list(dict.fromkeys(apis + closure))[:difficulty]
    criteria = [{"point": f"uses {p} correctly", "entity": p} for p in points]
    body = hints["test_body"]
    test = hints["test_name"]
    if fmt == "programming":
        statement = (
            f"Write {language} code that reproduces the scenario exercised by {test}. "
            f"It must use {', '.join(points)} with their real names and argument lists."
        )
        answer = _fence(body, language)
    elif fmt == "fill_in_blank":
        lines = body.splitlines()
        idx = [i for i, ln in enumerate(lines) if any(a.split("::")[-1].split(".")[-1] + "(" in ln for a in apis) and i > 0]
        if not idx:
            idx = [i for i in range(1, len(lines))] or [0]
        pick = rng.choice(idx)
        answer = lines[pick].strip()
        blanked = lines[:pick] + [re.sub(r"\S.*", "____", lines[pick])] + lines[pick + 1 :]
        statement = "Fill in the line marked ____ so the code behaves as the original test intends:\n" + _fence("\n".join(blanked), language)
    else:
        statement = f"Explain what {test} checks and how it relies on {', '.join(points)}."
        answer = f"{test} exercises " + ", ".join(points) + ". " + " ".join(f"It relies on {p}." for p in points)
    return json.dumps({"statement": statement, "reference_answer": answer, "grading_criteria": criteria})


def judge(hints: dict) -> str:
    ref, cand = hints["reference"], hints["candidate"]
    if _norm(ref) == _norm(cand):
        return "VERDICT: consistent\nRATIONALE: answers match after whitespace normalization"
    a, b = _tokens(ref), _tokens(cand)
    overlap = len(a & b) / max(1, len(a | b))
    if overlap >= 0.6:
        return f"VERDICT: consistent\nRATIONALE: token overlap {overlap:.2f}"
    return f"VERDICT: inconsistent\nRATIONALE: token overlap {overlap:.2f}"


class SyntheticClient:
    """Rule-based client for offline runs and tests.

    With probability ``flake`` the first attempt of a trace request returns
    an unusable answer, so rejection sampling is exercised.
    """

    def __init__(self, seed: int = 0, flake: float = 0.2) -> None:
        self.seed = seed
        self.flake = flake

    def complete(self, req: GenRequest, attempt: int) -> Completion:
        rng = random.Random(f"{self.seed}:{req.digest(attempt)}")
        h = req.hints
        role = req.role
        if role is Role.PARAPHRASE:
            s = h["statement"]
            first = s.split(" ", 1)[0] if s else ""
            if s and not any(first.startswith(n) for n in h.get("names", ())):
                s = s[0].lower() + s[1:]
            frames = list(PARAPHRASE_FRAMES)
            rng.shuffle(frames)
            return Completion("\n".join(f"{i}. {f.format(s=s)}" for i, f in enumerate(frames[: h["n"]], 1)))
        if role is Role.NEGATIVE_NATURALIZE:
            return Completion(h["name"])
        if role is Role.TASK_DESIGN:
            return Completion(design_task(h, rng))
        if role is Role.DECOMPOSE:
            out = decompose(h)
            return Completion(json.dumps(out) if out else "The test has nothing to split.")
        if role is Role.REPAIR:
            return Completion(repair(h))
        if role is Role.JUDGE:
            return Completion(judge(h))
        if role is Role.TRACE_GENERATION:
            labels = [it.label for it in req.context.items][:6]
            steps = [f"Check {lab}." for lab in labels] or ["Read the question."]
            reasoning = "\n".join(["Look at the relevant code first.", *steps, "Compose the answer."])
            if attempt == 1 and rng.random() < self.flake:
                return Completion("I am not sure.", reasoning)
            return Completion(h.get("answer", ""), reasoning)
        raise ValueError(f"synthetic client has no rule for role {role.value}")
