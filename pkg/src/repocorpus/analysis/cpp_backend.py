"""C++ frontend built on tree-sitter.

Purely syntactic: no preprocessing, no template instantiation. ERROR
subtrees are skipped, so macro-heavy regions degrade to file text only.
"""

from __future__ import annotations

import tree_sitter_cpp
from tree_sitter import Language, Node, Parser

from ..graph.model import EntityKind, Signature
from .base import CallSite, Def, IncludeRef, NameRef, ParsedFile

CPP_LANGUAGE = Language(tree_sitter_cpp.language())

_DECLARATOR_WRAPPERS = (
    "pointer_declarator",
    "reference_declarator",
    "parenthesized_declarator",
    "attributed_declarator",
)


def new_parser() -> Parser:
    return Parser(CPP_LANGUAGE)


def _text(node: Node) -> str:
    return node.text.decode("utf-8", errors="replace")


def _strip_template(name: str) -> str:
    """Drop every ``<...>`` argument list (bracket-depth aware)."""
    if "<" not in name or name.startswith("operator"):
        return name.strip()
    out = []
    depth = 0
    for ch in name:
        if ch == "<":
            depth += 1
        elif ch == ">" and depth:
            depth -= 1
        elif depth == 0:
            out.append(ch)
    return "".join(out).strip()


def _function_declarator(node: Node | None) -> Node | None:
    while node is not None:
        if node.type == "function_declarator":
            return node
        if node.type in _DECLARATOR_WRAPPERS or node.type == "init_declarator":
            node = node.child_by_field_name("declarator") or (node.named_children[-1] if node.named_children else None)
            continue
        return None
    return None


def _declared_name(node: Node | None) -> Node | None:
    """Identifier node at the core of a (non-function) declarator."""
    while node is not None:
        if node.type in ("identifier", "field_identifier", "qualified_identifier"):
            return node
        if node.type in _DECLARATOR_WRAPPERS or node.type in ("init_declarator", "array_declarator"):
            node = node.child_by_field_name("declarator")
            continue
        return None
    return None


def _param_name(param: Node, i: int) -> str:
    decl = param.child_by_field_name("declarator")
    ident = _declared_name(decl)
    if ident is None and decl is not None:
        # e.g. ``int (&arr)[3]``; take the first identifier found
        stack = [decl]
        while stack:
            cur = stack.pop()
            if cur.type == "identifier":
                ident = cur
                break
            stack.extend(reversed(cur.named_children))
    return _text(ident) if ident is not None else f"arg{i}"


def signature_of(fdecl: Node) -> Signature:
    plist = fdecl.child_by_field_name("parameters")
    params: list[str] = []
    required = 0
    variadic = False
    if plist is None:
        return Signature((), 0)
    for i, p in enumerate(plist.named_children):
        if p.type == "comment":
            continue
        if p.type == "variadic_parameter_declaration" or p.type == "variadic_parameter":
            variadic = True
            continue
        if p.type == "parameter_declaration":
            if _text(p).strip() == "void" and len(plist.named_children) == 1:
                continue
            params.append(_param_name(p, i))
            required += 1
        elif p.type == "optional_parameter_declaration":
            params.append(_param_name(p, i))
    if any(c.type == "..." for c in plist.children):
        variadic = True
    return Signature(tuple(params), required, variadic)


def _name_parts(node: Node) -> list[str]:
    """Split a (possibly qualified/templated) name node into components."""
    raw = _strip_template(_text(node))
    parts = [p.strip() for p in raw.split("::")]
    return [p for p in parts if p] or [raw]


def _arg_count(args: Node | None) -> int | None:
    if args is None:
        return None
    if args.type == "initializer_list":
        return None
    return sum(1 for c in args.named_children if c.type != "comment")


class CppBackend:
    suffixes = (".h", ".hh", ".hpp", ".hxx", ".h++", ".ipp", ".inl", ".c", ".cc", ".cpp", ".cxx", ".c++")

    def __init__(self) -> None:
        self._parser = new_parser()

    def parse(self, path: str, text: str) -> ParsedFile:
        pf = ParsedFile(path=path, text=text)
        tree = self._parser.parse(text.encode("utf-8"))
        root = tree.root_node
        if root.has_error:
            first = self._first_error(root)
            pf.errors.append((first, "syntax error region skipped"))
        self._scope(pf, root, [], None)
        return pf

    @staticmethod
    def _first_error(root: Node) -> int:
        stack = [root]
        while stack:
            n = stack.pop()
            if n.type == "ERROR" or n.is_missing:
                return n.start_point[0] + 1
            stack.extend(reversed(n.children))
        return 0

    # -- declarations ---------------------------------------------------

    def _add(self, pf: ParsedFile, d: Def) -> int:
        pf.defs.append(d)
        return len(pf.defs) - 1

    def _scope(self, pf: ParsedFile, node: Node, ns: list[str], parent: int | None) -> None:
        """Walk a namespace-level declaration list."""
        for child in node.named_children:
            t = child.type
            if t == "ERROR":
                continue
            if t == "preproc_include":
                self._include(pf, child)
            elif t == "namespace_definition":
                name_node = child.child_by_field_name("name")
                body = child.child_by_field_name("body")
                sub = ns + _name_parts(name_node) if name_node is not None else ns
                if body is not None:
                    self._scope(pf, body, sub, parent)
            elif t in ("preproc_ifdef", "preproc_if", "preproc_else", "preproc_elif", "linkage_specification", "declaration_list"):
                inner = child.child_by_field_name("body") if t == "linkage_specification" else child
                if inner is not None:
                    self._scope(pf, inner, ns, parent)
            elif t == "template_declaration":
                self._scope(pf, child, ns, parent)
            elif t in ("class_specifier", "struct_specifier"):
                self._class(pf, child, ns, parent)
            elif t == "function_definition":
                self._function(pf, child, ns, parent, in_class=None)
            elif t == "declaration":
                self._namespace_declaration(pf, child, ns, parent)
            elif t == "expression_statement":
                # tree-sitter sometimes reads ``struct X {...};`` oddly; ignore
                continue

    def _include(self, pf: ParsedFile, node: Node) -> None:
        path_node = node.child_by_field_name("path")
        if path_node is None:
            return
        raw = _text(path_node)
        system = path_node.type == "system_lib_string"
        target = raw.strip('"<> ')
        pf.includes.append(IncludeRef(target, node.start_point[0] + 1, system=system))

    def _span(self, node: Node, outer: Node | None = None) -> tuple[int, int, str]:
        n = outer or node
        return n.start_point[0] + 1, n.end_point[0] + 1, _text(n)

    def _outer(self, node: Node) -> Node:
        """Include an enclosing ``template <...>`` header in the span."""
        p = node.parent
        if p is not None and p.type == "template_declaration":
            return p
        return node

    def _class(self, pf: ParsedFile, node: Node, ns: list[str], parent: int | None, cls: list[str] | None = None) -> None:
        name_node = node.child_by_field_name("name")
        body = node.child_by_field_name("body")
        if name_node is None or body is None:
            return
        scope = (cls or ns) + _name_parts(name_node)
        qual = "::".join(scope)
        s, e, text = self._span(node, self._outer(node))
        idx = self._add(pf, Def(EntityKind.CLASS, qual, parent, s, e, text))
        self._class_body(pf, body, scope, idx)

    def _class_body(self, pf: ParsedFile, body: Node, scope: list[str], idx: int) -> None:
        for member in body.named_children:
            t = member.type
            if t == "template_declaration":
                inner = [c for c in member.named_children if c.type != "template_parameter_list"]
                for c in inner:
                    self._member(pf, c, scope, idx)
            else:
                self._member(pf, member, scope, idx)

    def _member(self, pf: ParsedFile, member: Node, scope: list[str], idx: int) -> None:
        t = member.type
        if t == "function_definition":
            self._function(pf, member, scope, idx, in_class=scope)
        elif t in ("field_declaration", "declaration"):
            fdecl = _function_declarator(member.child_by_field_name("declarator"))
            if fdecl is not None:
                self._method_decl(pf, member, fdecl, scope, idx)
                return
            for c in member.named_children:
                if c.type in ("class_specifier", "struct_specifier"):
                    self._class(pf, c, scope, idx, cls=scope)
        elif t in ("class_specifier", "struct_specifier"):
            self._class(pf, member, scope, idx, cls=scope)

    def _method_decl(self, pf: ParsedFile, member: Node, fdecl: Node, scope: list[str], idx: int) -> None:
        name_node = fdecl.child_by_field_name("declarator")
        if name_node is None:
            return
        name = _strip_template(_text(name_node))
        s, e, text = self._span(member, self._outer(member))
        self._add(pf, Def(EntityKind.METHOD, "::".join(scope + [name]), idx, s, e, text, signature_of(fdecl), declaration=True))

    def _function(self, pf: ParsedFile, node: Node, ns: list[str], parent: int | None, in_class: list[str] | None) -> None:
        fdecl = _function_declarator(node.child_by_field_name("declarator"))
        if fdecl is None:
            return
        name_node = fdecl.child_by_field_name("declarator")
        if name_node is None:
            return
        s, e, text = self._span(node, self._outer(node))
        sig = signature_of(fdecl)
        if in_class is not None:
            qual = "::".join(in_class + [_strip_template(_text(name_node))])
            idx = self._add(pf, Def(EntityKind.METHOD, qual, parent, s, e, text, sig))
        elif name_node.type == "qualified_identifier":
            parts = _name_parts(name_node)
            qual = "::".join(ns + parts)
            idx = self._add(pf, Def(EntityKind.FUNCTION, qual, parent, s, e, text, sig, out_of_line=True))
        else:
            name = _strip_template(_text(name_node))
            if name in ("TEST", "TEST_F", "TEST_P", "TYPED_TEST") and sig.count == 2:
                name = f"{name}_{sig.params[0]}_{sig.params[1]}"
                sig = Signature((), 0)
            qual = "::".join(ns + [name])
            idx = self._add(pf, Def(EntityKind.FUNCTION, qual, parent, s, e, text, sig))
        body = node.child_by_field_name("body")
        if body is not None:
            self._uses(pf, idx, body)
        for init in node.named_children:
            if init.type == "field_initializer_list":
                self._uses(pf, idx, init)

    def _namespace_declaration(self, pf: ParsedFile, node: Node, ns: list[str], parent: int | None) -> None:
        text_head = _text(node).lstrip()
        if text_head.startswith(("typedef", "using", "friend")):
            return
        for c in node.named_children:
            if c.type in ("class_specifier", "struct_specifier"):
                self._class(pf, c, ns, parent)
        for decl in node.children_by_field_name("declarator"):
            if _function_declarator(decl) is not None:
                # free-function prototypes are not entities
                continue
            ident = _declared_name(decl)
            if ident is None:
                continue
            s, e, text = self._span(node)
            idx = self._add(pf, Def(EntityKind.GLOBAL, "::".join(ns + _name_parts(ident)), parent, s, e, text))
            if decl.type == "init_declarator":
                value = decl.child_by_field_name("value")
                if value is not None:
                    self._uses(pf, idx, value)

    # -- uses -------------------------------------------------------------

    def _uses(self, pf: ParsedFile, owner: int, body: Node) -> None:
        stack = [body]
        skip: set[int] = set()
        while stack:
            n = stack.pop()
            t = n.type
            if t == "ERROR":
                continue
            if t == "call_expression":
                fn = n.child_by_field_name("function")
                nargs = _arg_count(n.child_by_field_name("arguments"))
                line = n.start_point[0] + 1
                if fn is not None:
                    site = self._call_site(owner, fn, nargs, line)
                    if site is not None:
                        pf.calls.append(site)
                        if fn.type in ("identifier", "qualified_identifier", "template_function"):
                            skip.add(fn.id)
            elif t == "new_expression":
                typ = n.child_by_field_name("type")
                if typ is not None and typ.type in ("type_identifier", "qualified_identifier", "template_type"):
                    parts = _name_parts(typ)
                    pf.calls.append(
                        CallSite(owner, parts[-1], tuple(parts[:-1]), _arg_count(n.child_by_field_name("arguments")), n.start_point[0] + 1)
                    )
                    skip.add(typ.id)
            elif n.id not in skip and t in ("identifier", "type_identifier", "qualified_identifier"):
                parent = n.parent
                is_decl_name = parent is not None and parent.child_by_field_name("declarator") == n
                is_field = parent is not None and parent.type == "field_expression" and parent.child_by_field_name("field") == n
                if not is_decl_name and not is_field:
                    parts = _name_parts(n)
                    pf.refs.append(NameRef(owner, parts[-1], tuple(parts[:-1]), n.start_point[0] + 1))
                if t == "qualified_identifier":
                    continue
            stack.extend(reversed(n.named_children))

    def _call_site(self, owner: int, fn: Node, nargs: int | None, line: int) -> CallSite | None:
        t = fn.type
        if t == "identifier":
            return CallSite(owner, _text(fn), (), nargs, line)
        if t in ("qualified_identifier", "template_function"):
            parts = _name_parts(fn)
            return CallSite(owner, parts[-1], tuple(parts[:-1]), nargs, line)
        if t == "field_expression":
            field = fn.child_by_field_name("field")
            obj = fn.child_by_field_name("argument")
            if field is None:
                return None
            name = _strip_template(_text(field))
            qual = (_text(obj),) if obj is not None else ("<expr>",)
            return CallSite(owner, name, qual, nargs, line, receiver=True)
        return None
