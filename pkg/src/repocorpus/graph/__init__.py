from .io import load_graph, read_graph, save_graph, write_graph
from .model import (
    CALLABLE_KINDS,
    CodeGraph,
    Diagnostic,
    Entity,
    EntityKind,
    Evidence,
    GraphIntegrityError,
    Language,
    Relation,
    RelationKind,
    Signature,
    Span,
    UnknownEntityError,
    entity_id,
)
from .queries import (
    CyclicGraphError,
    DagNode,
    FileDag,
    StatsReport,
    condense_file_dag,
    dependency_closure,
    enclosing_namespace,
    file_dependency_subgraph,
    graph_stats,
)

__all__ = [
    "CALLABLE_KINDS",
    "CodeGraph",
    "CyclicGraphError",
    "DagNode",
    "Diagnostic",
    "Entity",
    "EntityKind",
    "Evidence",
    "FileDag",
    "GraphIntegrityError",
    "Language",
    "Relation",
    "RelationKind",
    "Signature",
    "Span",
    "StatsReport",
    "UnknownEntityError",
    "condense_file_dag",
    "dependency_closure",
    "enclosing_namespace",
    "entity_id",
    "file_dependency_subgraph",
    "graph_stats",
    "load_graph",
    "read_graph",
    "save_graph",
    "write_graph",
]
