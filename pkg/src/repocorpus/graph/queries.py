"""Read-only queries over a :class:`CodeGraph`."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import networkx as nx

from .model import (
    CALLABLE_KINDS,
    FILE_EDGE_KINDS,
    CodeGraph,
    Entity,
    EntityKind,
    RelationKind,
    UnknownEntityError,
)


class CyclicGraphError(ValueError):
    pass


@dataclass(frozen=True)
class DagNode:
    """A file, or a set of mutually dependent files merged into one node.

    ``members`` is sorted by path and ``texts`` is aligned with it.
    """

    key: str
    members: tuple[str, ...]
    texts: tuple[str, ...]

    @property
    def text(self) -> str:
        return "\n".join(self.texts)


@dataclass
class FileDag:
    nodes: dict[str, DagNode] = field(default_factory=dict)
    edges: set[tuple[str, str]] = field(default_factory=set)

    def successors(self, key: str) -> list[str]:
        return sorted(v for (u, v) in self.edges if u == key)

    def adjacency(self) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {k: [] for k in self.nodes}
        for u, v in self.edges:
            adj[u].append(v)
        for k in adj:
            adj[k].sort()
        return adj

    def in_degree(self) -> dict[str, int]:
        deg = {k: 0 for k in self.nodes}
        for _, v in self.edges:
            deg[v] += 1
        return deg

    def roots(self) -> list[str]:
        return sorted(k for k, d in self.in_degree().items() if d == 0)

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from(self.edges)
        return g

    def is_acyclic(self) -> bool:
        return nx.is_directed_acyclic_graph(self.to_networkx())


def file_dependency_subgraph(graph: CodeGraph) -> FileDag:
    """Restrict the graph to file entities and include/dependency edges.

    Edges point from the dependent file to the file it depends on, so roots
    (in-degree zero) are files nothing else depends on. Parallel edges and
    self-loops collapse away.
    """
    dag = FileDag()
    for f in graph.files():
        dag.nodes[f.file_path] = DagNode(f.file_path, (f.file_path,), (f.body_text,))
    for rel in graph.relations:
        if rel.kind not in FILE_EDGE_KINDS:
            continue
        u = graph[rel.src].file_path
        v = graph[rel.dst].file_path
        if u != v:
            dag.edges.add((u, v))
    return dag


def condense_file_dag(dag: FileDag) -> FileDag:
    """Collapse strongly connected components into merged nodes.

    Acyclic input is returned unchanged (as a copy). A merged node's key is
    its member paths joined with ``+``.
    """
    g = dag.to_networkx()
    sccs = [sorted(c) for c in nx.strongly_connected_components(g)]
    if all(len(c) == 1 for c in sccs):
        return FileDag(dict(dag.nodes), set(dag.edges))
    owner: dict[str, str] = {}
    out = FileDag()
    for comp in sccs:
        if len(comp) == 1:
            node = dag.nodes[comp[0]]
        else:
            node = DagNode(
                "+".join(comp),
                tuple(m for k in comp for m in dag.nodes[k].members),
                tuple(t for k in comp for t in dag.nodes[k].texts),
            )
        out.nodes[node.key] = node
        for k in comp:
            owner[k] = node.key
    for u, v in dag.edges:
        cu, cv = owner[u], owner[v]
        if cu != cv:
            out.edges.add((cu, cv))
    return out


CLOSURE_EDGES = (RelationKind.CALL, RelationKind.REFERENCE)


def dependency_closure(graph: CodeGraph, root: str) -> list[Entity]:
    """Entities transitively reachable from ``root`` over call/reference edges.

    The root itself is included. Returned in (file, line, name) order.
    """
    if root not in graph:
        raise UnknownEntityError(root)
    seen = {root}
    queue = deque([root])
    while queue:
        cur = queue.popleft()
        for rel in graph.out_edges(cur, CLOSURE_EDGES):
            if rel.dst not in seen:
                seen.add(rel.dst)
                queue.append(rel.dst)
    return sorted((graph[e] for e in seen), key=lambda e: (e.file_path, e.span.start, e.name, e.id))


def enclosing_namespace(graph: CodeGraph, entity_id: str) -> str:
    """Qualified scope of an entity: its name's qualifier, falling back to the
    innermost containing class."""
    ent = graph[entity_id]
    if ent.scope:
        return ent.scope
    for anc in reversed(graph.contain_chain(entity_id)):
        if anc.kind is EntityKind.CLASS:
            return anc.name
    return ""


@dataclass
class StatsReport:
    files: int = 0
    lines_of_code: int = 0
    classes: int = 0
    functions: int = 0
    globals: int = 0
    file_dependencies: int = 0
    avg_file_level_deps: float = 0.0
    avg_function_deps: float = 0.0

    def to_record(self) -> dict:
        return {
            "files": self.files,
            "lines_of_code": self.lines_of_code,
            "classes": self.classes,
            "functions": self.functions,
            "globals": self.globals,
            "file_dependencies": self.file_dependencies,
            "avg_file_level_deps": round(self.avg_file_level_deps, 4),
            "avg_function_deps": round(self.avg_function_deps, 4),
        }

    def to_text(self) -> str:
        rows = [
            ("Number of files", str(self.files)),
            ("Lines of code", str(self.lines_of_code)),
            ("Classes", str(self.classes)),
            ("Functions/methods", str(self.functions)),
            ("Global variables", str(self.globals)),
            ("File-level dependencies", str(self.file_dependencies)),
            ("Avg. FLD of file", f"{self.avg_file_level_deps:.2f}"),
            ("Avg. deps of function", f"{self.avg_function_deps:.2f}"),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v:>10}" for k, v in rows)


def graph_stats(graph: CodeGraph) -> StatsReport:
    """Table-style statistics.

    Lines of code counts non-blank lines of every file. Average file-level
    dependencies is the mean out-degree in the (uncondensed) file DAG.
    Average function dependencies is ``|closure| - 1`` averaged over
    function/method definitions (declarations without bodies are skipped).
    """
    files = graph.files()
    if not files:
        return StatsReport()
    dag = file_dependency_subgraph(graph)
    defs = [e for e in graph.of_kind(*CALLABLE_KINDS) if not e.declaration]
    loc = sum(1 for f in files for line in f.body_text.splitlines() if line.strip())
    avg_fn = sum(len(dependency_closure(graph, e.id)) - 1 for e in defs) / len(defs) if defs else 0.0
    return StatsReport(
        files=len(files),
        lines_of_code=loc,
        classes=sum(1 for _ in graph.of_kind(EntityKind.CLASS)),
        functions=len(defs),
        globals=sum(1 for _ in graph.of_kind(EntityKind.GLOBAL)),
        file_dependencies=len(dag.edges),
        avg_file_level_deps=len(dag.edges) / len(files),
        avg_function_deps=avg_fn,
    )
