"""Python frontend built on the standard library :mod:`ast`."""

from __future__ import annotations

import ast
from pathlib import PurePosixPath

from ..graph.model import EntityKind, Signature
from .base import CallSite, Def, IncludeRef, NameRef, ParsedFile


def module_name(path: str, include_roots: list[str]) -> str:
    """Dotted module name of a repository-relative path.

    The longest include root that prefixes ``path`` is stripped first.
    """
    p = PurePosixPath(path)
    best = None
    for root in include_roots:
        r = PurePosixPath(root)
        if str(r) in (".", ""):
            cand = p
        else:
            try:
                cand = p.relative_to(r)
            except ValueError:
                continue
        if best is None or len(cand.parts) < len(best.parts):
            best = cand
    parts = list((best or p).with_suffix("").parts)
    if parts and parts[-1] == "__init__":
        parts.pop()
    return ".".join(parts)


def _signature(fn: ast.FunctionDef | ast.AsyncFunctionDef, drop_receiver: bool) -> Signature:
    args = fn.args
    positional = [a.arg for a in args.posonlyargs + args.args]
    n_pos_defaults = len(args.defaults)
    required = len(positional) - n_pos_defaults
    if drop_receiver and positional:
        positional = positional[1:]
        required = max(required - 1, 0)
    kwonly = [a.arg for a in args.kwonlyargs]
    required += sum(1 for d in args.kw_defaults if d is None)
    return Signature(
        params=tuple(positional + kwonly),
        required=required,
        variadic=args.vararg is not None or args.kwarg is not None,
    )


def _is_staticmethod(fn: ast.AST) -> bool:
    return any(isinstance(d, ast.Name) and d.id == "staticmethod" for d in getattr(fn, "decorator_list", []))


def _dotted(node: ast.AST) -> list[str] | None:
    parts = []
    while isinstance(node, ast.Attribute):
        parts.append(node.attr)
        node = node.value
    if isinstance(node, ast.Name):
        parts.append(node.id)
        return parts[::-1]
    return None


def _nargs(call: ast.Call) -> int | None:
    if any(isinstance(a, ast.Starred) for a in call.args) or any(k.arg is None for k in call.keywords):
        return None
    return len(call.args) + len(call.keywords)


def _local_names(fn: ast.AST) -> set[str]:
    names: set[str] = set()
    if isinstance(fn, (ast.FunctionDef, ast.AsyncFunctionDef, ast.Lambda)):
        a = fn.args
        for arg in a.posonlyargs + a.args + a.kwonlyargs:
            names.add(arg.arg)
        if a.vararg:
            names.add(a.vararg.arg)
        if a.kwarg:
            names.add(a.kwarg.arg)
    for node in ast.walk(fn):
        if isinstance(node, ast.Name) and isinstance(node.ctx, (ast.Store, ast.Del)):
            names.add(node.id)
        elif isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)) and node is not fn:
            names.add(node.name)
        elif isinstance(node, ast.arg):
            names.add(node.arg)
    return names


class PythonBackend:
    suffixes = (".py",)

    def __init__(self, include_roots: list[str] | None = None) -> None:
        self.include_roots = include_roots or ["."]

    def parse(self, path: str, text: str) -> ParsedFile:
        pf = ParsedFile(path=path, text=text)
        try:
            tree = ast.parse(text, filename=path)
        except SyntaxError as exc:
            pf.errors.append((exc.lineno or 0, f"syntax error: {exc.msg}"))
            return pf
        lines = text.splitlines()
        module = module_name(path, self.include_roots)
        prefix = f"{module}." if module else ""
        self._imports(tree, pf)
        # (def index, node, walk roots) for call/ref extraction
        owners: list[tuple[int, ast.AST, list[ast.AST]]] = []

        def seg(node: ast.AST) -> tuple[int, int, str]:
            start = min([node.lineno] + [d.lineno for d in getattr(node, "decorator_list", [])])
            end = node.end_lineno or node.lineno
            return start, end, "\n".join(lines[start - 1 : end])

        def add(d: Def) -> int:
            pf.defs.append(d)
            return len(pf.defs) - 1

        def visit_class(node: ast.ClassDef, qual: str, parent: int | None) -> None:
            start, end, body = seg(node)
            idx = add(Def(EntityKind.CLASS, qual, parent, start, end, body))
            rest = []
            for stmt in node.body:
                if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)):
                    s, e, b = seg(stmt)
                    sig = _signature(stmt, drop_receiver=not _is_staticmethod(stmt))
                    midx = add(Def(EntityKind.METHOD, f"{qual}.{stmt.name}", idx, s, e, b, sig))
                    owners.append((midx, stmt, [stmt]))
                elif isinstance(stmt, ast.ClassDef):
                    visit_class(stmt, f"{qual}.{stmt.name}", idx)
                else:
                    rest.append(stmt)
            rest.extend(node.bases)
            rest.extend(node.decorator_list)
            owners.append((idx, node, rest))

        seen_globals: set[str] = set()

        def visit_block(stmts: list[ast.stmt]) -> None:
            for stmt in stmts:
                if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)):
                    s, e, b = seg(stmt)
                    idx = add(Def(EntityKind.FUNCTION, prefix + stmt.name, None, s, e, b, _signature(stmt, False)))
                    owners.append((idx, stmt, [stmt]))
                elif isinstance(stmt, ast.ClassDef):
                    visit_class(stmt, prefix + stmt.name, None)
                elif isinstance(stmt, (ast.Assign, ast.AnnAssign)):
                    targets = stmt.targets if isinstance(stmt, ast.Assign) else [stmt.target]
                    names = []
                    for t in targets:
                        elts = t.elts if isinstance(t, (ast.Tuple, ast.List)) else [t]
                        names.extend(e.id for e in elts if isinstance(e, ast.Name))
                    s, e, b = seg(stmt)
                    for name in names:
                        if name.startswith("__") and name.endswith("__") or name in seen_globals:
                            continue
                        seen_globals.add(name)
                        idx = add(Def(EntityKind.GLOBAL, prefix + name, None, s, e, b))
                        if stmt.value is not None:
                            owners.append((idx, stmt, [stmt.value]))
                elif isinstance(stmt, ast.If):
                    visit_block(stmt.body)
                    visit_block(stmt.orelse)
                elif isinstance(stmt, ast.Try):
                    visit_block(stmt.body)
                    for h in stmt.handlers:
                        visit_block(h.body)
                    visit_block(stmt.orelse)
                    visit_block(stmt.finalbody)

        visit_block(tree.body)
        for idx, node, roots in owners:
            self._uses(pf, idx, node, roots)
        return pf

    def _imports(self, tree: ast.Module, pf: ParsedFile) -> None:
        for node in ast.walk(tree):
            if isinstance(node, ast.Import):
                for alias in node.names:
                    pf.includes.append(IncludeRef(alias.name, node.lineno))
                    if alias.asname:
                        pf.aliases[alias.asname] = (alias.name, "")
                    else:
                        head = alias.name.split(".")[0]
                        pf.aliases.setdefault(head, (head, ""))
            elif isinstance(node, ast.ImportFrom):
                mod = node.module or ""
                names = tuple(a.name for a in node.names if a.name != "*")
                pf.includes.append(IncludeRef(mod, node.lineno, level=node.level, names=names))
                for alias in node.names:
                    if alias.name == "*":
                        continue
                    pf.aliases[alias.asname or alias.name] = ("." * node.level + mod, alias.name)

    def _uses(self, pf: ParsedFile, owner: int, node: ast.AST, roots: list[ast.AST]) -> None:
        local = _local_names(node) if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)) else set()
        call_funcs: set[int] = set()
        for root in roots:
            for sub in ast.walk(root):
                if not isinstance(sub, ast.Call):
                    continue
                call_funcs.add(id(sub.func))
                func = sub.func
                if isinstance(func, ast.Name):
                    if func.id in local:
                        continue
                    pf.calls.append(CallSite(owner, func.id, (), _nargs(sub), sub.lineno))
                elif isinstance(func, ast.Attribute):
                    chain = _dotted(func.value)
                    if chain is None:
                        if isinstance(func.value, ast.Call) and isinstance(func.value.func, ast.Name) and func.value.func.id == "super":
                            continue
                        pf.calls.append(CallSite(owner, func.attr, ("<expr>",), _nargs(sub), sub.lineno, receiver=True))
                        continue
                    receiver = chain[0] in local or chain[0] in ("self", "cls")
                    pf.calls.append(CallSite(owner, func.attr, tuple(chain), _nargs(sub), sub.lineno, receiver=receiver))
        for root in roots:
            for sub in ast.walk(root):
                if id(sub) in call_funcs:
                    continue
                if isinstance(sub, ast.Name) and isinstance(sub.ctx, ast.Load) and sub.id not in local:
                    pf.refs.append(NameRef(owner, sub.id, (), sub.lineno))
                elif isinstance(sub, ast.Attribute) and isinstance(sub.ctx, ast.Load):
                    chain = _dotted(sub.value)
                    if chain and chain[0] in pf.aliases and chain[0] not in local:
                        pf.refs.append(NameRef(owner, sub.attr, tuple(chain), sub.lineno))
