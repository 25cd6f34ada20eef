"""Dependency-preserving pretraining corpus and general-data mixing."""

from __future__ import annotations

import logging
import random
from typing import Iterable

from ..graph.model import CodeGraph
from ..graph.queries import condense_file_dag, file_dependency_subgraph
from .paths import enumerate_dfs_paths
from .tokenizer import ByteQuarterTokenizer, Tokenizer
from .windows import CptConfig, CptSample, generate_windows, node_text

log = logging.getLogger(__name__)


def build_cpt_corpus(graph: CodeGraph, cfg: CptConfig, tokenizer: Tokenizer | None = None) -> list[CptSample]:
    """File DAG -> condensed DAG -> DFS paths -> windows, deduplicated.

    Samples keep first-seen order (roots, then paths, then windows), so the
    output is a pure function of ``(graph, cfg)``.
    """
    tok = tokenizer or ByteQuarterTokenizer()
    lang = graph.language.value
    dag = condense_file_dag(file_dependency_subgraph(graph))
    sizes = {k: tok.count(node_text(n, lang)) for k, n in dag.nodes.items()}
    seen: set[str] = set()
    out: list[CptSample] = []
    for path in enumerate_dfs_paths(dag, cfg.max_paths_per_root):
        nodes = [dag.nodes[k] for k in path]
        for s in generate_windows(nodes, [sizes[k] for k in path], cfg, lang, tok):
            if s.id in seen:
                continue
            seen.add(s.id)
            out.append(s)
    return out


def mix_corpus(domain: list[dict], general: Iterable[dict], ratio: float, seed: int) -> list[dict]:
    """Interleave general-domain records so they make up ``ratio`` of the output.

    The general share is ``round(n * ratio / (1 - ratio))`` for ``n`` domain
    records. General records are drawn without replacement; if the stream
    runs short, the remainder is drawn with replacement. Every output record
    gains a boolean ``general`` key, and the combined list is shuffled with
    ``random.Random(seed)``.
    """
    if not 0 <= ratio < 1:
        raise ValueError(f"mix ratio must be in [0, 1), got {ratio}")
    rng = random.Random(seed)
    pool = list(general)
    want = round(len(domain) * ratio / (1 - ratio)) if ratio else 0
    if want and not pool:
        raise ValueError("mix ratio > 0 but the general-domain stream is empty")
    if want <= len(pool):
        picked = rng.sample(pool, want)
    else:
        log.warning("general stream has %d records, %d requested; resampling", len(pool), want)
        picked = rng.sample(pool, len(pool)) + rng.choices(pool, k=want - len(pool))
    mixed = [{**r, "general": False} for r in domain] + [{**r, "general": True} for r in picked]
    rng.shuffle(mixed)
    return mixed
