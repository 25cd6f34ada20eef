"""Static checks of generated code against a graph and a context bundle.

Used by the stage-1 rule filter (existence, invocation prefix, arity) and
by the context-completeness check on accepted samples.
"""

from __future__ import annotations

import ast
import textwrap
from dataclasses import dataclass

from ..analysis.cpp_backend import CppBackend
from ..analysis.python_backend import _dotted, _local_names, _nargs
from ..builtins import is_builtin_call
from ..graph import CodeGraph, Entity, EntityKind

CALL_KINDS = (EntityKind.FUNCTION, EntityKind.METHOD, EntityKind.CLASS)
_SNIPPET_FN = "__snippet__"


class SnippetParseError(ValueError):
    pass


@dataclass(frozen=True)
class CallUse:
    name: str
    qualifier: tuple[str, ...]
    nargs: int | None
    line: int
    receiver: bool = False

    def display(self, sep: str) -> str:
        return sep.join(self.qualifier + (self.name,))


@dataclass(frozen=True)
class Violation:
    reason: str  # unknown-entity | wrong-prefix | arity-mismatch
    name: str
    line: int
    detail: str
    in_repo: bool = False


@dataclass
class Snippet:
    calls: list[CallUse]
    local_defs: set[str]
    aliases: dict[str, tuple[str, ...]]  # python: local name -> dotted target


def _python_snippet(code: str) -> Snippet:
    for text in (code, textwrap.dedent(code)):
        try:
            tree = ast.parse(text)
            break
        except SyntaxError as exc:
            err = exc
    else:
        raise SnippetParseError(f"python syntax error: {err.msg} (line {err.lineno})")
    aliases: dict[str, tuple[str, ...]] = {}
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            for a in node.names:
                aliases[a.asname or a.name.split(".")[0]] = tuple((a.name if a.asname else a.name.split(".")[0]).split("."))
        elif isinstance(node, ast.ImportFrom):
            for a in node.names:
                aliases[a.asname or a.name] = tuple((node.module or "").split(".")) + (a.name,)
    defs = {n.name for n in ast.walk(tree) if isinstance(n, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef))}
    local = _local_names(tree) | {a for n in ast.walk(tree) if isinstance(n, (ast.FunctionDef, ast.Lambda)) for a in _local_names(n)}
    local -= set(aliases)
    calls = []
    for node in ast.walk(tree):
        if not isinstance(node, ast.Call):
            continue
        f = node.func
        if isinstance(f, ast.Name):
            if f.id in local and f.id not in defs:
                continue
            calls.append(CallUse(f.id, (), _nargs(node), node.lineno))
        elif isinstance(f, ast.Attribute):
            chain = _dotted(f.value)
            if chain is None:
                if isinstance(f.value, ast.Call) and isinstance(f.value.func, ast.Name) and f.value.func.id == "super":
                    continue
                calls.append(CallUse(f.attr, ("<expr>",), _nargs(node), node.lineno, True))
            else:
                recv = chain[0] in local or chain[0] in ("self", "cls")
                calls.append(CallUse(f.attr, tuple(chain), _nargs(node), node.lineno, recv))
    calls.sort(key=lambda c: c.line)
    return Snippet(calls, defs, aliases)


_cpp = CppBackend()


def _cpp_snippet(code: str) -> Snippet:
    pf = _cpp.parse("snippet.cpp", code)
    wrapped = False
    has_defs = any(d.kind in CALL_KINDS for d in pf.defs)
    if pf.errors or not has_defs:
        # statement-level snippet: parse it as a function body
        pf2 = _cpp.parse("snippet.cpp", f"void {_SNIPPET_FN}() {{\n{code}\n}}\n")
        if not pf2.errors:
            pf, wrapped = pf2, True
        elif pf.errors:
            raise SnippetParseError(f"c++ syntax error near line {pf.errors[0][0]}")
    defs = {d.name.split("::")[-1] for d in pf.defs} - {_SNIPPET_FN}
    shift = 1 if wrapped else 0
    calls = [CallUse(c.name, c.qualifier, c.nargs, c.line - shift, c.receiver) for c in pf.calls]
    calls.sort(key=lambda c: c.line)
    return Snippet(calls, defs, {})


def parse_snippet(code: str, language: str) -> Snippet:
    if not code.strip():
        raise SnippetParseError("empty code")
    return _cpp_snippet(code) if language == "cpp" else _python_snippet(code)


def _accepts(graph: CodeGraph, ent: Entity, nargs: int | None, by_name: dict[str, list[Entity]]) -> bool:
    if nargs is None:
        return True
    if ent.signature is not None:
        return ent.signature.accepts(nargs)
    if ent.kind is EntityKind.CLASS:
        ctors = [
            c
            for c in by_name.get(ent.short_name, []) + by_name.get("__init__", [])
            if c.kind is EntityKind.METHOD and c.scope == ent.name and c.signature is not None
        ]
        return not ctors or any(c.signature.accepts(nargs) for c in ctors)
    return True


def _scope_matches(ent: Entity, qualifier: tuple[str, ...], sep: str) -> bool:
    want = sep.join(q for q in qualifier if q)
    return bool(want) and (ent.scope == want or ent.scope.endswith(sep + want))


def check_calls(code: str, language: str, graph: CodeGraph, context_ids: set[str]) -> list[Violation]:
    """Every call in ``code`` checked against the context's entities.

    Raises :class:`SnippetParseError` when the code does not parse.
    """
    snip = parse_snippet(code, language)
    sep = "::" if language == "cpp" else "."
    by_name: dict[str, list[Entity]] = {}
    for e in graph.entities.values():
        if e.kind in CALL_KINDS:
            by_name.setdefault(e.short_name, []).append(e)
    out: list[Violation] = []
    for call in snip.calls:
        name, qual = call.name, call.qualifier
        shown = call.display("." if call.receiver else sep)
        if not call.receiver and not qual and name in snip.local_defs:
            continue
        if language == "python" and qual and qual[0] in snip.aliases:
            qual = snip.aliases[qual[0]] + qual[1:]
        elif language == "python" and not qual and name in snip.aliases:
            *mod, name = snip.aliases[name]
            qual = tuple(mod)
        repo = by_name.get(name, [])
        ctx = [e for e in repo if e.id in context_ids]
        if not ctx:
            if is_builtin_call(language, call.name, call.qualifier):
                continue
            where = "exists in the repository but not in the context" if repo else "not found"
            out.append(Violation("unknown-entity", shown, call.line, f"{shown}: {where}", bool(repo)))
            continue
        if call.receiver:
            cands = [e for e in ctx if e.kind is EntityKind.METHOD]
        elif qual:
            cands = [e for e in ctx if _scope_matches(e, qual, sep)]
            if not cands and language == "python" and qual[0] not in snip.aliases:
                # attribute of some object we cannot see: treat as a method call
                cands = [e for e in ctx if e.kind is EntityKind.METHOD]
        elif language == "python" and call.qualifier == () and call.name in snip.aliases:
            cands = [e for e in ctx if e.kind is not EntityKind.METHOD]
        else:
            cands = [e for e in ctx if e.kind is not EntityKind.METHOD]
        if not cands:
            have = ", ".join(sorted({e.name for e in ctx}))
            out.append(Violation("wrong-prefix", shown, call.line, f"{shown} does not match {have}", True))
            continue
        # defaults may live only on the header declaration of an out-of-line definition
        names = {e.name for e in cands}
        cands = cands + [e for e in repo if e.name in names and e not in cands]
        if not any(_accepts(graph, e, call.nargs, by_name) for e in cands):
            sigs = ", ".join(sorted({f"{e.name}({', '.join(e.signature.params)})" for e in cands if e.signature}) or {e.name for e in cands})
            out.append(Violation("arity-mismatch", shown, call.line, f"{shown} called with {call.nargs} args; expected {sigs}", True))
    return out


def missing_context_symbols(code: str, language: str, graph: CodeGraph, context_ids: set[str]) -> list[str]:
    """In-repo callables used by ``code`` whose definitions are absent from the context."""
    return [v.name for v in check_calls(code, language, graph, context_ids) if v.reason == "unknown-entity" and v.in_repo]
