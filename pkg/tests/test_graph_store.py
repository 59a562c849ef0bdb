import json
import random

import pytest

from graphqa.graph import (
    GraphEdge,
    GraphError,
    GraphLoadError,
    GraphNode,
    GraphSchema,
    PropertyGraph,
    TransformConfig,
    apply_transforms,
    build_entity_index,
    derive_schema,
    load_graph,
    render_schema_text,
)

from .oracles import brute_force_schema_scan, random_graph


def _graph(node_specs, edge_specs):
    nodes = [GraphNode(id=i, label=l, name=n) for i, l, n in node_specs]
    edges = [GraphEdge(source_id=s, relation=r, target_id=t) for s, r, t in edge_specs]
    return PropertyGraph(nodes, edges)


class TestLoadGraph:
    def test_empty_tsv_files_give_empty_graph(self, tmp_path):
        (tmp_path / "nodes.tsv").write_text("")
        (tmp_path / "edges.tsv").write_text("")
        graph = load_graph(tmp_path, "triples-tsv")
        assert graph.node_count == 0
        assert graph.edge_count == 0

    def test_two_nodes_one_edge(self, tmp_path):
        (tmp_path / "nodes.tsv").write_text("a\tdrug\taspirin\nb\tdisease\tflu\n")
        (tmp_path / "edges.tsv").write_text("a\tindication\tb\n")
        graph = load_graph(tmp_path, "triples-tsv")
        assert graph.node_count == 2
        assert graph.edge_count == 1
        assert graph.has_edge("a", "indication", "b")

    def test_dangling_edge_endpoint_names_the_id(self, tmp_path):
        (tmp_path / "nodes.tsv").write_text("a\tdrug\taspirin\n")
        (tmp_path / "edges.tsv").write_text("a\tindication\tghost\n")
        with pytest.raises(GraphLoadError, match="ghost"):
            load_graph(tmp_path, "triples-tsv")

    def test_malformed_record_reports_line_number(self, tmp_path):
        (tmp_path / "nodes.tsv").write_text("a\tdrug\taspirin\nbroken line\n")
        (tmp_path / "edges.tsv").write_text("")
        with pytest.raises(GraphLoadError, match="nodes.tsv:2"):
            load_graph(tmp_path, "triples-tsv")

    def test_duplicate_triples_collapsed(self, tmp_path):
        doc = {
            "nodes": [
                {"id": "a", "label": "drug", "name": "aspirin"},
                {"id": "b", "label": "disease", "name": "flu"},
            ],
            "edges": [
                {"source": "a", "relation": "indication", "target": "b"},
                {"source": "a", "relation": "indication", "target": "b"},
            ],
        }
        path = tmp_path / "g.json"
        path.write_text(json.dumps(doc))
        assert load_graph(path, "graph-json").edge_count == 1

    def test_duplicate_node_id_rejected(self):
        with pytest.raises(GraphError, match="duplicate node id"):
            _graph([("a", "drug", "x"), ("a", "drug", "y")], [])

    def test_unknown_format(self, tmp_path):
        with pytest.raises(GraphLoadError, match="unknown graph format"):
            load_graph(tmp_path, "csv")


class TestApplyTransforms:
    def test_rename_ppi(self):
        g = _graph(
            [("a", "gene/protein", "P1"), ("b", "gene/protein", "P2")],
            [("a", "ppi", "b"), ("b", "ppi", "a")],
        )
        cfg = TransformConfig(relation_renames={"ppi": "protein-protein interaction"})
        out = apply_transforms(g, cfg)
        assert {e.relation for e in out.edges} == {"protein-protein interaction"}

    def test_cross_label_reverse_pair_keeps_one_direction(self):
        g = _graph(
            [("x", "drug", "dx"), ("y", "disease", "dy")],
            [("x", "r", "y"), ("y", "r", "x")],
        )
        out = apply_transforms(g, TransformConfig(drop_reverse_duplicates=True))
        assert out.edge_count == 1
        assert out.edges[0].key == ("x", "r", "y")  # first listed direction wins

    def test_self_relation_keeps_both_directions(self):
        g = _graph(
            [("x", "disease", "d1"), ("y", "disease", "d2")],
            [("x", "related to disease", "y"), ("y", "related to disease", "x")],
        )
        cfg = TransformConfig(
            drop_reverse_duplicates=True,
            bidirectional_self_relations=frozenset({"related to disease"}),
        )
        assert apply_transforms(g, cfg).edge_count == 2

    def test_unpaired_reverse_direction_edge_is_kept(self):
        g = _graph(
            [("x", "drug", "dx"), ("y", "disease", "dy"), ("z", "disease", "dz")],
            [("x", "r", "y"), ("z", "r", "x")],
        )
        out = apply_transforms(g, TransformConfig(drop_reverse_duplicates=True))
        assert out.edge_count == 2

    def test_missing_rename_key_is_not_fatal(self, caplog):
        g = _graph([("a", "drug", "x")], [])
        cfg = TransformConfig(relation_renames={"nope": "still nope"})
        with caplog.at_level("WARNING"):
            out = apply_transforms(g, cfg)
        assert out == g
        assert "nope" in caplog.text

    def test_rename_values_must_be_distinct(self):
        with pytest.raises(GraphError, match="distinct"):
            TransformConfig(relation_renames={"a": "same", "b": "same"})

    def test_idempotent_over_random_graphs(self):
        rng = random.Random(11)
        cfg = TransformConfig(
            relation_renames={"treats": "indicated for"}, drop_reverse_duplicates=True
        )
        for _ in range(60):
            g = random_graph(rng)
            once = apply_transforms(g, cfg)
            assert apply_transforms(once, cfg) == once


class TestDeriveSchema:
    def test_empty_graph_gives_empty_schema(self):
        schema = derive_schema(PropertyGraph([], []))
        assert schema.node_labels == frozenset()
        assert schema.relation_triples == frozenset()

    def test_single_contraindication_edge(self):
        g = _graph(
            [("a", "drug", "x"), ("b", "disease", "y")],
            [("a", "contraindication", "b")],
        )
        schema = derive_schema(g)
        assert schema.relation_triples == {("drug", "contraindication", "disease")}

    def test_matches_brute_force_scan_on_random_graphs(self):
        rng = random.Random(7)
        for _ in range(100):
            g = random_graph(rng, max_nodes=30)
            labels, triples, bidirectional = brute_force_schema_scan(g)
            schema = derive_schema(g)
            assert schema.node_labels == labels
            assert schema.relation_triples == triples
            assert schema.self_bidirectional == bidirectional

    def test_every_triple_has_a_witness_edge(self):
        rng = random.Random(13)
        for _ in range(50):
            g = random_graph(rng)
            schema = derive_schema(g)
            label_of = {n.id: n.label for n in g.nodes}
            witnessed = {
                (label_of[e.source_id], e.relation, label_of[e.target_id])
                for e in g.edges
            }
            assert schema.relation_triples == witnessed

    def test_schema_invariants_enforced(self):
        with pytest.raises(GraphError):
            GraphSchema(
                node_labels=frozenset({"a"}),
                relation_triples=frozenset({("a", "r", "missing")}),
            )


class TestRenderSchemaText:
    def test_empty_schema_keeps_headers(self):
        text = render_schema_text(derive_schema(PropertyGraph([], [])))
        assert text == "Node labels and properties:\nRelationships:"

    def test_triple_line_format(self):
        g = _graph(
            [("a", "drug", "x"), ("b", "disease", "y")],
            [("a", "contraindication", "b")],
        )
        text = render_schema_text(derive_schema(g))
        assert "(:drug)-[:contraindication]->(:disease)" in text

    def test_non_identifier_label_backticked(self):
        g = _graph([("a", "gene/protein", "P")], [])
        assert "(:`gene/protein`)" in render_schema_text(derive_schema(g))

    def test_pure_function_of_schema(self):
        rng = random.Random(3)
        for _ in range(20):
            g = random_graph(rng)
            schema = derive_schema(g)
            assert render_schema_text(schema) == render_schema_text(schema)
        # two graphs with the same schema render identically
        g1 = _graph(
            [("a", "drug", "one"), ("b", "disease", "two")],
            [("a", "r", "b")],
        )
        g2 = _graph(
            [("u", "drug", "three"), ("v", "disease", "four")],
            [("u", "r", "v")],
        )
        assert render_schema_text(derive_schema(g1)) == render_schema_text(derive_schema(g2))


class TestEntityIndex:
    def test_exact_name_lookup(self):
        g = _graph([("a", "disease", "multiple sclerosis")], [])
        index = build_entity_index(g)
        assert index.lookup("multiple sclerosis") == {"disease"}

    def test_absent_name_gives_empty_set(self):
        index = build_entity_index(PropertyGraph([], []))
        assert index.lookup("anything") == frozenset()

    def test_same_name_under_two_labels(self):
        g = _graph([("a", "drug", "dual"), ("b", "disease", "dual")], [])
        index = build_entity_index(g)
        # verify by scan, independent of the index implementation
        expected = {n.label for n in g.nodes if n.name == "dual"}
        assert index.lookup("dual") == expected == {"drug", "disease"}

    def test_lookup_nonempty_iff_name_exists(self):
        rng = random.Random(5)
        for _ in range(30):
            g = random_graph(rng, max_nodes=15)
            index = build_entity_index(g)
            names = {n.name for n in g.nodes}
            for name in names:
                assert index.lookup(name)
            assert not index.lookup("definitely not present")
