from __future__ import annotations

import itertools

from repocorpus.graph import (
    CodeGraph,
    Entity,
    EntityKind,
    Language,
    Relation,
    RelationKind,
    Signature,
    Span,
    entity_id,
)


def file_graph(files: dict[str, str], edges=(), language: str = "cpp", kind=RelationKind.INCLUDE) -> CodeGraph:
    g = CodeGraph(language=Language(language))
    for path, text in files.items():
        n = max(1, len(text.splitlines()))
        g.add_entity(Entity(entity_id(EntityKind.FILE, path, path), EntityKind.FILE, path, path, Span(1, n), text))
    for u, v in edges:
        g.add_relation(Relation(entity_id(EntityKind.FILE, u, u), entity_id(EntityKind.FILE, v, v), kind))
    return g


def add_fn(g: CodeGraph, path: str, name: str, params=(), line: int = 1, kind=EntityKind.FUNCTION, body: str = "") -> str:
    eid = entity_id(kind, name, path)
    sig = Signature(tuple(params), len(params)) if kind in (EntityKind.FUNCTION, EntityKind.METHOD) else None
    g.add_entity(Entity(eid, kind, name, path, Span(line, line), body or f"{name}()", sig))
    g.add_relation(Relation(entity_id(EntityKind.FILE, path, path), eid, RelationKind.CONTAIN))
    return eid


def brute_force_paths(nodes, edges) -> list[list[str]]:
    """Every edge-chain from an in-degree-0 node to an out-degree-0 node."""
    nodes = sorted(nodes)
    eset = set(edges)
    indeg = {n: 0 for n in nodes}
    outdeg = {n: 0 for n in nodes}
    for u, v in eset:
        indeg[v] += 1
        outdeg[u] += 1
    out = []
    for k in range(1, len(nodes) + 1):
        for perm in itertools.permutations(nodes, k):
            if indeg[perm[0]] or outdeg[perm[-1]]:
                continue
            if all((a, b) in eset for a, b in zip(perm, perm[1:])):
                out.append(list(perm))
    return sorted(out)


def oracle_windows(sizes, limit, mode, tail):
    """Declarative window definition, brute-forcing each window's extent.

    From start s, the window is the longest run s..e whose sizes sum to at
    most ``limit``. A window reaching the last file is the tail. Otherwise
    it is emitted and the next start is e (overlap_one; e+1 if the window
    was one file) or s+1 (step_one). No fitting run -> truncated single.
    """
    n = len(sizes)
    out = []
    s = 0
    while s < n:
        fits = [e for e in range(s, n) if sum(sizes[s : e + 1]) <= limit]
        if not fits:
            out.append((s, s + 1, True))
            s += 1
            continue
        e = max(fits)
        if e == n - 1:
            if tail:
                out.append((s, n, False))
            break
        out.append((s, e + 1, False))
        if mode == "overlap_one":
            s = e if e > s else e + 1
        else:
            s += 1
    return out


def literal_algorithm(sizes, limit, max_steps=10_000):
    """Line-for-line transliteration of the published pseudocode.

    1-indexed inclusive slices, no tail emission, no guards. Returns
    ``None`` if it fails to terminate within ``max_steps``.
    """
    p = list(sizes)
    out = []
    l, r = 1, 1
    steps = 0
    while r <= len(p):
        steps += 1
        if steps > max_steps:
            return None
        if sum(p[l - 1 : r]) <= limit:
            r = r + 1
        else:
            out.append((l - 1, r - 1))  # p[l:r-1] as half-open 0-based range
            l = r - 1
            r = l
    return out
