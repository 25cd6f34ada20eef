"""Depth-first path enumeration over the file DAG."""

from __future__ import annotations

from typing import Iterator

import networkx as nx

from ..graph.queries import CyclicGraphError, FileDag


def _dfs_paths(adj: dict[str, list[str]], root: str) -> Iterator[list[str]]:
    """Root-to-terminal paths in lexicographic child order, lazily."""
    if not adj[root]:
        yield [root]
        return
    path = [root]
    stack = [iter(adj[root])]
    while stack:
        child = next(stack[-1], None)
        if child is None:
            stack.pop()
            path.pop()
            continue
        path.append(child)
        if adj[child]:
            stack.append(iter(adj[child]))
        else:
            yield list(path)
            path.pop()


def _covering_path(adj: dict[str, list[str]], desc: dict[str, set[str]], root: str, u: str, v: str) -> list[str]:
    """First (lexicographic) root->u path, then u->v, then first-child descent."""
    path = [root]
    cur = root
    while cur != u:
        cur = next(c for c in adj[cur] if c == u or u in desc[c])
        path.append(cur)
    path.append(v)
    cur = v
    while adj[cur]:
        cur = adj[cur][0]
        path.append(cur)
    return path


def enumerate_dfs_paths(dag: FileDag, max_paths_per_root: int = 1000) -> list[list[str]]:
    """All depth-first paths from zero in-degree nodes to terminal nodes.

    Children are visited in key order. Each root contributes at most
    ``max_paths_per_root`` enumerated paths; past the cap, one extra path is
    added for every edge reachable from the root that no earlier path has
    made adjacent, so every edge is adjacent in at least one path.
    """
    g = dag.to_networkx()
    if not nx.is_directed_acyclic_graph(g):
        raise CyclicGraphError("file dependency graph has a cycle; condense it first")
    adj = dag.adjacency()
    covered: set[tuple[str, str]] = set()
    out: list[list[str]] = []
    desc: dict[str, set[str]] | None = None
    for root in dag.roots():
        produced = 0
        exhausted = True
        for p in _dfs_paths(adj, root):
            if produced >= max_paths_per_root:
                exhausted = False
                break
            out.append(p)
            covered.update(zip(p, p[1:]))
            produced += 1
        if exhausted:
            continue
        if desc is None:
            desc = {n: nx.descendants(g, n) for n in g.nodes}
        reachable = {root} | desc[root]
        for u, v in sorted(e for e in dag.edges if e[0] in reachable):
            if (u, v) in covered:
                continue
            p = _covering_path(adj, desc, root, u, v)
            out.append(p)
            covered.update(zip(p, p[1:]))
    return out
