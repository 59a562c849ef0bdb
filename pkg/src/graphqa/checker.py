"""Three-stage validation and repair of generated queries.

Stages run in a fixed order and only ever move a query closer to the schema:

1. syntax check -- return items get the ``.name`` property; a lone unbound
   return variable is bound to the only variable-less node;
2. node check -- name-filtered nodes get the label their name actually occurs
   under, and relations touching a corrected node are renamed when exactly one
   compatible relation exists;
3. relation check -- relationship arrows are flipped when only the opposite
   orientation exists in the schema.

Nothing here raises on a defective query: what cannot be repaired is recorded
as an unresolved defect and the caller decides what to do with the query.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

from graphqa.cypher import (
    CypherQuery,
    NodePattern,
    ParseError,
    PathPattern,
    RelPattern,
    LEFT_TO_RIGHT,
    RIGHT_TO_LEFT,
    parse_query,
    serialize_node,
    serialize_query,
    serialize_rel,
    serialize_return_item,
)
from graphqa.graph import EntityIndex, GraphSchema

CORRECTION_STAGES = (
    "SyntaxReturn",
    "SyntaxBinding",
    "NodeType",
    "RelationAdjust",
    "RelationDirection",
)

DEFECT_KINDS = (
    "UnknownEntity",
    "NoCompatibleRelation",
    "UnknownRelation",
    "UnboundReturnVariable",
    "UnknownLabel",
    "ParseError",
)


@dataclass(frozen=True)
class Correction:
    stage: str
    description: str
    before: str
    after: str

    def __post_init__(self) -> None:
        if self.before == self.after:
            raise ValueError("a correction must change the query fragment")


@dataclass(frozen=True)
class UnresolvedDefect:
    kind: str
    detail: str


@dataclass
class RepairReport:
    input_query: str
    output_query: str
    corrections: list[Correction] = field(default_factory=list)
    unresolved: list[UnresolvedDefect] = field(default_factory=list)

    @property
    def repaired(self) -> bool:
        return not self.unresolved

    def to_json_dict(self) -> dict:
        return {
            "input_query": self.input_query,
            "output_query": self.output_query,
            "corrections": [
                {
                    "stage": c.stage,
                    "description": c.description,
                    "before": c.before,
                    "after": c.after,
                }
                for c in self.corrections
            ],
            "unresolved": [{"kind": d.kind, "detail": d.detail} for d in self.unresolved],
        }


# ---------------------------------------------------------------------------
# Stage 1: syntax node checker
# ---------------------------------------------------------------------------

def syntax_node_check(
    query: CypherQuery,
) -> tuple[CypherQuery, list[Correction], list[UnresolvedDefect]]:
    """Force every return item into ``variable.name`` form and bind a lone
    unbound return variable to the only node that lacks one."""
    q = copy.deepcopy(query)
    corrections: list[Correction] = []
    unresolved: list[UnresolvedDefect] = []

    for item in q.return_items:
        if item.property == "name":
            continue
        before = serialize_return_item(item)
        if item.property is None:
            description = f"RETURN item '{item.variable}' now yields the node name"
        else:
            description = (
                f"RETURN item '{before}' rewritten to yield the node name"
            )
        item.property = "name"
        corrections.append(
            Correction("SyntaxReturn", description, before, serialize_return_item(item))
        )

    bound = q.bound_variables()
    unbound_items = [item for item in q.return_items if item.variable not in bound]
    anonymous = [
        node for pattern in q.patterns for node in pattern.nodes if node.variable is None
    ]
    if unbound_items:
        if len(unbound_items) == 1 and len(anonymous) == 1:
            node, variable = anonymous[0], unbound_items[0].variable
            before = serialize_node(node)
            node.variable = variable
            corrections.append(
                Correction(
                    "SyntaxBinding",
                    f"bound RETURN variable '{variable}' to the only node without one",
                    before,
                    serialize_node(node),
                )
            )
        else:
            for item in unbound_items:
                unresolved.append(
                    UnresolvedDefect(
                        "UnboundReturnVariable",
                        f"RETURN variable {item.variable!r} is not bound in any MATCH pattern",
                    )
                )
    return q, corrections, unresolved


# ---------------------------------------------------------------------------
# Stage 2: node checker
# ---------------------------------------------------------------------------

def _adjacent_relations(
    pattern: PathPattern, position: int
) -> list[tuple[RelPattern, NodePattern]]:
    """Relationships touching the node at ``position``, with the other endpoint."""
    adjacent = []
    if position > 0:
        adjacent.append((pattern.relationships[position - 1], pattern.nodes[position - 1]))
    if position < len(pattern.relationships):
        adjacent.append((pattern.relationships[position], pattern.nodes[position + 1]))
    return adjacent


def _label_supports_relation(
    label: str, relation: str, other_label: str | None, schema: GraphSchema
) -> bool:
    for src, rel, dst in schema.relation_triples:
        if rel != relation:
            continue
        if other_label is None:
            if src == label or dst == label:
                return True
        elif (src == label and dst == other_label) or (src == other_label and dst == label):
            return True
    return False


def _choose_label(
    candidates: frozenset[str],
    adjacent: list[tuple[RelPattern, NodePattern]],
    schema: GraphSchema,
) -> str:
    """Prefer a candidate under which at least one adjacent relation is
    schema-valid; break remaining ties lexicographically."""
    ordered = sorted(candidates)
    preferred = [
        label
        for label in ordered
        if any(
            _label_supports_relation(label, rel.relation, other.label, schema)
            for rel, other in adjacent
        )
    ]
    return (preferred or ordered)[0]


def _compatible_relations(
    label_a: str, label_b: str, schema: GraphSchema
) -> list[str]:
    return sorted(
        {
            rel
            for src, rel, dst in schema.relation_triples
            if (src == label_a and dst == label_b) or (src == label_b and dst == label_a)
        }
    )


def node_type_check(
    query: CypherQuery, index: EntityIndex, schema: GraphSchema
) -> tuple[CypherQuery, list[Correction], list[UnresolvedDefect]]:
    """Correct the label of every name-filtered node against the entity index,
    then re-examine the relations touching corrected nodes.

    Nodes without a name filter are never re-labeled; an unknown label on such
    a node is recorded as a defect instead.
    """
    q = copy.deepcopy(query)
    corrections: list[Correction] = []
    unresolved: list[UnresolvedDefect] = []

    for pattern in q.patterns:
        for position, node in enumerate(pattern.nodes):
            if node.name_filter is None:
                if node.label is not None and node.label not in schema.node_labels:
                    unresolved.append(
                        UnresolvedDefect(
                            "UnknownLabel",
                            f"label {node.label!r} does not exist in the graph schema",
                        )
                    )
                continue

            labels = index.lookup(node.name_filter)
            if not labels:
                unresolved.append(
                    UnresolvedDefect(
                        "UnknownEntity",
                        f"no node named {node.name_filter!r} exists in the graph",
                    )
                )
                continue
            if node.label in labels:
                continue

            adjacent = _adjacent_relations(pattern, position)
            chosen = _choose_label(labels, adjacent, schema)
            before = serialize_node(node)
            if node.label is None:
                description = f"node {node.name_filter!r} typed as '{chosen}'"
            else:
                description = (
                    f"node {node.name_filter!r} is a '{chosen}', not a '{node.label}'"
                )
            if len(labels) > 1:
                description += (
                    f" (name occurs under {sorted(labels)}; "
                    f"picked the schema-consistent choice)"
                )
            node.label = chosen
            corrections.append(
                Correction("NodeType", description, before, serialize_node(node))
            )

            # the corrected label can invalidate the relations touching this
            # node; rename them when exactly one compatible relation exists
            for rel, other in adjacent:
                if other.label is None:
                    continue
                if _label_supports_relation(node.label, rel.relation, other.label, schema):
                    continue
                compatible = _compatible_relations(node.label, other.label, schema)
                if len(compatible) == 1:
                    rel_before = serialize_rel(rel)
                    old_relation = rel.relation
                    rel.relation = compatible[0]
                    corrections.append(
                        Correction(
                            "RelationAdjust",
                            f"relation '{old_relation}' cannot connect "
                            f"'{node.label}' and '{other.label}'; replaced with the "
                            f"only compatible relation '{rel.relation}'",
                            rel_before,
                            serialize_rel(rel),
                        )
                    )
                elif not compatible:
                    unresolved.append(
                        UnresolvedDefect(
                            "NoCompatibleRelation",
                            f"no relation connects '{node.label}' and "
                            f"'{other.label}' in the schema (query uses "
                            f"{rel.relation!r})",
                        )
                    )
                # several candidates: leave the relation for the direction checker
    return q, corrections, unresolved


# ---------------------------------------------------------------------------
# Stage 3: relation checker
# ---------------------------------------------------------------------------

def relation_direction_check(
    query: CypherQuery, schema: GraphSchema
) -> tuple[CypherQuery, list[Correction], list[UnresolvedDefect]]:
    """Flip relationship arrows whose orientation contradicts the schema.

    Only relations between two labeled endpoints can be checked. Self-label
    relations declared bidirectional are valid either way and never flipped.
    """
    q = copy.deepcopy(query)
    corrections: list[Correction] = []
    unresolved: list[UnresolvedDefect] = []

    for pattern in q.patterns:
        for i, rel in enumerate(pattern.relationships):
            left, right = pattern.nodes[i], pattern.nodes[i + 1]
            if left.label is None or right.label is None:
                continue
            if rel.direction == LEFT_TO_RIGHT:
                src_label, dst_label = left.label, right.label
            else:
                src_label, dst_label = right.label, left.label
            if schema.has_triple(src_label, rel.relation, dst_label):
                continue
            if src_label == dst_label and rel.relation in schema.self_bidirectional:
                continue
            if schema.has_triple(dst_label, rel.relation, src_label):
                before = serialize_rel(rel)
                rel.direction = (
                    RIGHT_TO_LEFT if rel.direction == LEFT_TO_RIGHT else LEFT_TO_RIGHT
                )
                corrections.append(
                    Correction(
                        "RelationDirection",
                        f"relation '{rel.relation}' runs from '{dst_label}' to "
                        f"'{src_label}' in the schema; direction flipped",
                        before,
                        serialize_rel(rel),
                    )
                )
            else:
                unresolved.append(
                    UnresolvedDefect(
                        "UnknownRelation",
                        f"relation {rel.relation!r} does not connect "
                        f"'{src_label}' and '{dst_label}' in either direction",
                    )
                )
    return q, corrections, unresolved


# ---------------------------------------------------------------------------
# Full repair
# ---------------------------------------------------------------------------

def check_and_repair(
    query_text: str, schema: GraphSchema, index: EntityIndex
) -> RepairReport:
    """Parse, run the three stages in order, and serialize the result.

    Unparseable text is recorded as a terminal ParseError defect and passed
    through unmodified.
    """
    try:
        parsed = parse_query(query_text)
    except ParseError as exc:
        return RepairReport(
            input_query=query_text,
            output_query=query_text,
            unresolved=[UnresolvedDefect("ParseError", str(exc))],
        )
    q1, c1, u1 = syntax_node_check(parsed)
    q2, c2, u2 = node_type_check(q1, index, schema)
    q3, c3, u3 = relation_direction_check(q2, schema)
    return RepairReport(
        input_query=query_text,
        output_query=serialize_query(q3),
        corrections=c1 + c2 + c3,
        unresolved=u1 + u2 + u3,
    )


def validate_query(
    query: CypherQuery, schema: GraphSchema, index: EntityIndex
) -> list[str]:
    """The predicate a fully repaired query satisfies. Returns violations.

    Checks: every label exists; every name-filtered node carries a label its
    name occurs under; every relation between two labeled endpoints exists in
    the written orientation (bidirectional self-relations count either way);
    every return item is ``variable.name`` with the variable bound.
    """
    violations: list[str] = []
    for pattern in query.patterns:
        for node in pattern.nodes:
            if node.label is not None and node.label not in schema.node_labels:
                violations.append(f"unknown label {node.label!r}")
            if node.name_filter is not None:
                if node.label is None:
                    violations.append(
                        f"name filter {node.name_filter!r} has no node label"
                    )
                elif node.label not in index.lookup(node.name_filter):
                    violations.append(
                        f"{node.name_filter!r} does not occur under label {node.label!r}"
                    )
        for i, rel in enumerate(pattern.relationships):
            left, right = pattern.nodes[i], pattern.nodes[i + 1]
            if left.label is None or right.label is None:
                continue
            if rel.direction == LEFT_TO_RIGHT:
                src_label, dst_label = left.label, right.label
            else:
                src_label, dst_label = right.label, left.label
            if schema.has_triple(src_label, rel.relation, dst_label):
                continue
            if src_label == dst_label and rel.relation in schema.self_bidirectional:
                continue
            violations.append(
                f"relation {rel.relation!r} invalid between "
                f"{src_label!r} and {dst_label!r}"
            )
    bound = query.bound_variables()
    for item in query.return_items:
        if item.property != "name":
            violations.append(f"return item {serialize_return_item(item)!r} is not .name")
        if item.variable not in bound:
            violations.append(f"return variable {item.variable!r} is unbound")
    return violations
