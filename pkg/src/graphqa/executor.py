"""Pattern-matching execution of the restricted Cypher subset on a property graph.

Semantics:

* one result row per complete assignment of every pattern position (shared
  variables join patterns; anonymous nodes bind independently per occurrence);
* within a single path pattern an edge instance is never used twice
  (relationship distinctness);
* unknown labels and relations match nothing -- they yield empty results,
  not errors;
* rows are projected per the RETURN clause and sorted lexicographically;
  duplicates are preserved (bag semantics).
"""

from __future__ import annotations

from graphqa.cypher import (
    LEFT_TO_RIGHT,
    CypherQuery,
    NodePattern,
    PathPattern,
    escape_identifier,
    escape_string,
)
from graphqa.graph import GraphNode, PropertyGraph


class ExecutionError(Exception):
    """The query is not executable against any graph (e.g. unbound RETURN)."""


def format_node(node: GraphNode) -> str:
    """Render a whole node, the way a bare RETURN variable surfaces it."""
    parts = [f'name:"{escape_string(node.name)}"']
    for key in sorted(node.extra_properties):
        parts.append(f'{key}:"{escape_string(node.extra_properties[key])}"')
    return f"(:{escape_identifier(node.label)} {{{', '.join(parts)}}})"


def _node_matches(node: GraphNode, pattern: NodePattern) -> bool:
    if pattern.label is not None and node.label != pattern.label:
        return False
    if pattern.name_filter is not None and node.name != pattern.name_filter:
        return False
    return True


def _slot_key(pattern_index: int, position: int, node: NodePattern) -> str:
    if node.variable:
        return node.variable
    return f"\x00anon:{pattern_index}:{position}"


def execute_query(graph: PropertyGraph, query: CypherQuery) -> list[list[str]]:
    """Return all rows satisfying every path pattern simultaneously."""
    bound = query.bound_variables()
    for item in query.return_items:
        if item.variable not in bound:
            raise ExecutionError(
                f"RETURN variable {item.variable!r} is not bound in any MATCH pattern"
            )

    slot_plans: list[list[str]] = []  # per pattern: slot key per node position
    for pi, pattern in enumerate(query.patterns):
        slot_plans.append(
            [_slot_key(pi, pos, node) for pos, node in enumerate(pattern.nodes)]
        )

    rows: list[list[str]] = []
    bindings: dict[str, str] = {}

    def emit() -> None:
        row: list[str] = []
        for item in query.return_items:
            node = graph.node(bindings[item.variable])
            if item.property is None:
                row.append(format_node(node))
            elif item.property == "name":
                row.append(node.name)
            else:
                row.append(node.extra_properties.get(item.property, "null"))
        rows.append(row)

    def solve_pattern(pattern_index: int) -> None:
        if pattern_index == len(query.patterns):
            emit()
            return
        pattern = query.patterns[pattern_index]
        slots = slot_plans[pattern_index]
        extend(pattern, pattern_index, slots, 0, set())

    def extend(
        pattern: PathPattern,
        pattern_index: int,
        slots: list[str],
        position: int,
        used_edges: set[tuple[str, str, str]],
    ) -> None:
        if position == len(pattern.nodes):
            solve_pattern(pattern_index + 1)
            return
        node_pattern = pattern.nodes[position]
        slot = slots[position]
        if position == 0:
            if slot in bindings:
                candidates = [bindings[slot]]
            else:
                candidates = list(graph.node_ids())
            for node_id in candidates:
                if not _node_matches(graph.node(node_id), node_pattern):
                    continue
                newly_bound = slot not in bindings
                bindings[slot] = node_id
                extend(pattern, pattern_index, slots, 1, used_edges)
                if newly_bound:
                    del bindings[slot]
            return

        rel = pattern.relationships[position - 1]
        prev_id = bindings[slots[position - 1]]
        if rel.direction == LEFT_TO_RIGHT:
            neighbors = graph.out_neighbors(prev_id, rel.relation)
        else:
            neighbors = graph.in_neighbors(prev_id, rel.relation)
        for node_id in neighbors:
            if slot in bindings and bindings[slot] != node_id:
                continue
            if not _node_matches(graph.node(node_id), node_pattern):
                continue
            if rel.direction == LEFT_TO_RIGHT:
                edge = (prev_id, rel.relation, node_id)
            else:
                edge = (node_id, rel.relation, prev_id)
            if edge in used_edges:
                continue
            newly_bound = slot not in bindings
            bindings[slot] = node_id
            used_edges.add(edge)
            extend(pattern, pattern_index, slots, position + 1, used_edges)
            used_edges.discard(edge)
            if newly_bound:
                del bindings[slot]

    solve_pattern(0)
    rows.sort()
    return rows
