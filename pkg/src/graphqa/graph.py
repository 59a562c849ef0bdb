"""In-memory property graph: ingestion, display-name transforms, schema derivation,
and exact-name entity indexing.

The graph is immutable after construction and safe to share across threads.
Two on-disk formats are supported:

* ``triples-tsv`` -- a directory holding ``nodes.tsv`` (``id<TAB>label<TAB>name``)
  and ``edges.tsv`` (``source_id<TAB>relation<TAB>target_id``), UTF-8, no header.
* ``graph-json`` -- one document ``{"nodes": [...], "edges": [...]}``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from graphqa.cypher import escape_identifier

logger = logging.getLogger(__name__)

GRAPH_FORMATS = ("triples-tsv", "graph-json")


class GraphError(Exception):
    """A graph violates a structural invariant."""


class GraphLoadError(GraphError):
    """An input file could not be turned into a valid graph."""


@dataclass(frozen=True)
class GraphNode:
    """A typed, named node. ``extra_properties`` holds opaque string metadata."""

    id: str
    label: str
    name: str
    extra_properties: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.id:
            raise GraphError("node id must be non-empty")
        if not self.label:
            raise GraphError(f"node {self.id!r}: label must be non-empty")
        if not self.name:
            raise GraphError(f"node {self.id!r}: name must be non-empty")


@dataclass(frozen=True)
class GraphEdge:
    """A directed, typed edge between two node ids."""

    source_id: str
    relation: str
    target_id: str

    def __post_init__(self) -> None:
        if not self.relation:
            raise GraphError("edge relation must be non-empty")

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.source_id, self.relation, self.target_id)


class PropertyGraph:
    """Nodes plus directed typed edges, with adjacency indexes for matching.

    Duplicate ``(source, relation, target)`` triples are collapsed on
    construction; edges referencing unknown node ids are rejected.
    """

    def __init__(self, nodes: Iterable[GraphNode], edges: Iterable[GraphEdge]):
        self._nodes: dict[str, GraphNode] = {}
        for node in nodes:
            if node.id in self._nodes:
                raise GraphError(f"duplicate node id: {node.id!r}")
            self._nodes[node.id] = node

        self._edges: list[GraphEdge] = []
        self._edge_keys: set[tuple[str, str, str]] = set()
        self._out: dict[tuple[str, str], list[str]] = {}
        self._in: dict[tuple[str, str], list[str]] = {}
        for edge in edges:
            for endpoint in (edge.source_id, edge.target_id):
                if endpoint not in self._nodes:
                    raise GraphError(
                        f"edge ({edge.source_id!r}, {edge.relation!r}, "
                        f"{edge.target_id!r}) references unknown node id: {endpoint!r}"
                    )
            if edge.key in self._edge_keys:
                continue
            self._edge_keys.add(edge.key)
            self._edges.append(edge)
            self._out.setdefault((edge.source_id, edge.relation), []).append(edge.target_id)
            self._in.setdefault((edge.target_id, edge.relation), []).append(edge.source_id)

    @property
    def nodes(self) -> tuple[GraphNode, ...]:
        return tuple(self._nodes.values())

    @property
    def edges(self) -> tuple[GraphEdge, ...]:
        return tuple(self._edges)

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def node(self, node_id: str) -> GraphNode:
        return self._nodes[node_id]

    def has_node(self, node_id: str) -> bool:
        return node_id in self._nodes

    def has_edge(self, source_id: str, relation: str, target_id: str) -> bool:
        return (source_id, relation, target_id) in self._edge_keys

    def out_neighbors(self, source_id: str, relation: str) -> tuple[str, ...]:
        return tuple(self._out.get((source_id, relation), ()))

    def in_neighbors(self, target_id: str, relation: str) -> tuple[str, ...]:
        return tuple(self._in.get((target_id, relation), ()))

    def node_ids(self) -> Iterator[str]:
        return iter(self._nodes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PropertyGraph):
            return NotImplemented
        return self._nodes == other._nodes and self._edges == other._edges

    def __repr__(self) -> str:
        return f"PropertyGraph(nodes={self.node_count}, edges={self.edge_count})"


@dataclass(frozen=True)
class GraphSchema:
    """Observed node labels and directed (source_label, relation, target_label)
    triples, plus the self-label relations that occur in both directions."""

    node_labels: frozenset[str]
    relation_triples: frozenset[tuple[str, str, str]]
    self_bidirectional: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        for src, rel, dst in self.relation_triples:
            if src not in self.node_labels or dst not in self.node_labels:
                raise GraphError(
                    f"schema triple ({src!r}, {rel!r}, {dst!r}) references an unknown label"
                )
        self_rels = {rel for src, rel, dst in self.relation_triples if src == dst}
        stray = self.self_bidirectional - self_rels
        if stray:
            raise GraphError(
                f"bidirectional relations must be self-label relations: {sorted(stray)}"
            )

    def has_triple(self, source_label: str, relation: str, target_label: str) -> bool:
        return (source_label, relation, target_label) in self.relation_triples

    @property
    def relation_names(self) -> frozenset[str]:
        return frozenset(rel for _, rel, _ in self.relation_triples)


class EntityIndex:
    """Exact, case-sensitive name -> set-of-labels lookup over a graph's nodes."""

    def __init__(self, by_name: dict[str, frozenset[str]]):
        self._by_name = dict(by_name)

    def lookup(self, name: str) -> frozenset[str]:
        return self._by_name.get(name, frozenset())

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __len__(self) -> int:
        return len(self._by_name)

    def names(self) -> tuple[str, ...]:
        return tuple(self._by_name)


@dataclass(frozen=True)
class TransformConfig:
    """Ingestion adjustments: relation display-name renames, reverse-duplicate
    dropping, and the self-relations that stay bidirectional."""

    relation_renames: dict[str, str] = field(default_factory=dict)
    drop_reverse_duplicates: bool = False
    bidirectional_self_relations: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        values = list(self.relation_renames.values())
        if len(set(values)) != len(values):
            raise GraphError("relation rename targets must be distinct")

    @classmethod
    def from_dict(cls, data: dict) -> "TransformConfig":
        return cls(
            relation_renames=dict(data.get("relation_renames", {})),
            drop_reverse_duplicates=bool(data.get("drop_reverse_duplicates", False)),
            bidirectional_self_relations=frozenset(
                data.get("bidirectional_self_relations", ())
            ),
        )

    @classmethod
    def load(cls, path: str | Path) -> "TransformConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "relation_renames": dict(self.relation_renames),
            "drop_reverse_duplicates": self.drop_reverse_duplicates,
            "bidirectional_self_relations": sorted(self.bidirectional_self_relations),
        }


def load_graph(path: str | Path, format: str = "graph-json") -> PropertyGraph:
    """Load a property graph from disk.

    ``triples-tsv`` expects ``path`` to be a directory containing ``nodes.tsv``
    and ``edges.tsv``. Malformed records are reported with their line number;
    edges referencing unknown node ids fail the load.
    """
    path = Path(path)
    if format == "triples-tsv":
        return _load_triples_tsv(path)
    if format == "graph-json":
        return _load_graph_json(path)
    raise GraphLoadError(f"unknown graph format {format!r} (expected one of {GRAPH_FORMATS})")


def _split_record(line: str, path: Path, lineno: int) -> tuple[str, str, str]:
    fields = line.rstrip("\n").split("\t")
    if len(fields) != 3:
        raise GraphLoadError(
            f"{path}:{lineno}: expected 3 tab-separated fields, got {len(fields)}"
        )
    return fields[0], fields[1], fields[2]


def _load_triples_tsv(directory: Path) -> PropertyGraph:
    if not directory.is_dir():
        raise GraphLoadError(
            f"triples-tsv path must be a directory containing nodes.tsv and edges.tsv: {directory}"
        )
    nodes_path = directory / "nodes.tsv"
    edges_path = directory / "edges.tsv"
    for required in (nodes_path, edges_path):
        if not required.is_file():
            raise GraphLoadError(f"missing file: {required}")

    nodes: list[GraphNode] = []
    with open(nodes_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            node_id, label, name = _split_record(line, nodes_path, lineno)
            try:
                nodes.append(GraphNode(id=node_id, label=label, name=name))
            except GraphError as exc:
                raise GraphLoadError(f"{nodes_path}:{lineno}: {exc}") from exc

    edges: list[GraphEdge] = []
    with open(edges_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            source, relation, target = _split_record(line, edges_path, lineno)
            try:
                edges.append(GraphEdge(source_id=source, relation=relation, target_id=target))
            except GraphError as exc:
                raise GraphLoadError(f"{edges_path}:{lineno}: {exc}") from exc

    try:
        return PropertyGraph(nodes, edges)
    except GraphError as exc:
        raise GraphLoadError(str(exc)) from exc


def _load_graph_json(path: Path) -> PropertyGraph:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise GraphLoadError(f"{path}: {exc}") from exc
    if not isinstance(data, dict) or "nodes" not in data or "edges" not in data:
        raise GraphLoadError(f"{path}: expected an object with 'nodes' and 'edges'")

    nodes: list[GraphNode] = []
    for i, record in enumerate(data["nodes"]):
        try:
            nodes.append(
                GraphNode(
                    id=str(record["id"]),
                    label=record["label"],
                    name=record["name"],
                    extra_properties=dict(record.get("properties", {})),
                )
            )
        except (KeyError, TypeError, GraphError) as exc:
            raise GraphLoadError(f"{path}: node #{i}: {exc}") from exc

    edges: list[GraphEdge] = []
    for i, record in enumerate(data["edges"]):
        try:
            edges.append(
                GraphEdge(
                    source_id=str(record["source"]),
                    relation=record["relation"],
                    target_id=str(record["target"]),
                )
            )
        except (KeyError, TypeError, GraphError) as exc:
            raise GraphLoadError(f"{path}: edge #{i}: {exc}") from exc

    try:
        return PropertyGraph(nodes, edges)
    except GraphError as exc:
        raise GraphLoadError(f"{path}: {exc}") from exc


def save_graph_json(graph: PropertyGraph, path: str | Path) -> None:
    """Write a graph back out in the ``graph-json`` format (deterministic bytes)."""
    doc = {
        "nodes": [
            {
                "id": n.id,
                "label": n.label,
                "name": n.name,
                "properties": dict(n.extra_properties),
            }
            for n in graph.nodes
        ],
        "edges": [
            {"source": e.source_id, "relation": e.relation, "target": e.target_id}
            for e in graph.edges
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def apply_transforms(graph: PropertyGraph, cfg: TransformConfig) -> PropertyGraph:
    """Rename relations and drop cross-label reverse-duplicate edges.

    When both ``(a, r, b)`` and ``(b, r, a)`` exist with differing endpoint
    labels, the direction listed first in the input wins for the whole
    ``(relation, label-pair)`` group. Self-label relations are never dropped,
    so the self-relations declared bidirectional stay present both ways.
    The transform is idempotent.
    """
    missing = set(cfg.relation_renames) - {e.relation for e in graph.edges}
    for name in sorted(missing):
        logger.warning("rename key %r matches no relation in the graph", name)

    renamed = [
        GraphEdge(
            source_id=e.source_id,
            relation=cfg.relation_renames.get(e.relation, e.relation),
            target_id=e.target_id,
        )
        for e in graph.edges
    ]

    if not cfg.drop_reverse_duplicates:
        return PropertyGraph(graph.nodes, renamed)

    keys = {e.key for e in renamed}
    label_of = {n.id: n.label for n in graph.nodes}
    # first listed orientation wins per (relation, unordered label pair)
    canonical: dict[tuple[str, frozenset[str]], tuple[str, str]] = {}
    for e in renamed:
        src_label, dst_label = label_of[e.source_id], label_of[e.target_id]
        if src_label == dst_label:
            continue
        group = (e.relation, frozenset((src_label, dst_label)))
        if group not in canonical:
            canonical[group] = (src_label, dst_label)

    kept: list[GraphEdge] = []
    for e in renamed:
        src_label, dst_label = label_of[e.source_id], label_of[e.target_id]
        if src_label == dst_label:
            kept.append(e)
            continue
        group = (e.relation, frozenset((src_label, dst_label)))
        if (src_label, dst_label) == canonical[group]:
            kept.append(e)
        elif (e.target_id, e.relation, e.source_id) in keys:
            continue  # reverse duplicate of an edge kept in the canonical direction
        else:
            kept.append(e)  # unpaired edge: dropping it would lose information
    return PropertyGraph(graph.nodes, kept)


def derive_schema(graph: PropertyGraph) -> GraphSchema:
    """Scan the graph and report observed labels, triples, and the self-label
    relations seen in both directions."""
    labels = frozenset(n.label for n in graph.nodes)
    label_of = {n.id: n.label for n in graph.nodes}
    triples = frozenset(
        (label_of[e.source_id], e.relation, label_of[e.target_id]) for e in graph.edges
    )
    bidirectional = set()
    for e in graph.edges:
        if label_of[e.source_id] != label_of[e.target_id]:
            continue
        if graph.has_edge(e.target_id, e.relation, e.source_id):
            bidirectional.add(e.relation)
    return GraphSchema(
        node_labels=labels,
        relation_triples=triples,
        self_bidirectional=frozenset(bidirectional),
    )


def render_schema_text(schema: GraphSchema) -> str:
    """Render a schema as deterministic text for prompt injection.

    Labels come first with their properties (every label carries ``name``),
    then one ``(:src)-[:rel]->(:dst)`` line per relation triple, both sections
    sorted. Non-identifier labels and relations are backtick-escaped.
    """
    lines = ["Node labels and properties:"]
    for label in sorted(schema.node_labels):
        lines.append(f"(:{escape_identifier(label)}) {{name: STRING}}")
    lines.append("Relationships:")
    for src, rel, dst in sorted(schema.relation_triples):
        lines.append(
            f"(:{escape_identifier(src)})-[:{escape_identifier(rel)}]->"
            f"(:{escape_identifier(dst)})"
        )
    return "\n".join(lines)


def build_entity_index(graph: PropertyGraph) -> EntityIndex:
    """Map every node name to the set of labels it occurs under."""
    by_name: dict[str, set[str]] = {}
    for node in graph.nodes:
        by_name.setdefault(node.name, set()).add(node.label)
    return EntityIndex({name: frozenset(labels) for name, labels in by_name.items()})
