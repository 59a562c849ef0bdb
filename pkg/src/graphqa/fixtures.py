"""Deterministic desk-scale fixtures: a synthetic biomedical-flavored graph
(10 node types, ~200 nodes), its raw pre-transform variant, a 50-item
question set spanning the five path structures, and a replay transcript that
makes the whole pipeline runnable offline.

Everything here is synthetic test data. Names are invented (plus a handful of
well-known anchor entities so the flagship example questions read naturally);
no biomedical claim in this graph is real.

Expected answers are computed by direct path enumeration over the edge list,
independently of the query executor, so the two can be checked against each
other.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path

from graphqa.cypher import (
    LEFT_TO_RIGHT,
    RIGHT_TO_LEFT,
    CypherQuery,
    NodePattern,
    PathPattern,
    RelPattern,
    ReturnItem,
    parse_query,
    serialize_query,
)
from graphqa.graph import (
    GraphEdge,
    GraphNode,
    GraphSchema,
    PropertyGraph,
    TransformConfig,
    apply_transforms,
    save_graph_json,
)
from graphqa.llm import TranscriptEntry, prompt_hash, load_templates, render_prompt
from graphqa.pipeline import KnowledgeBase

import random

FIXTURE_SEED = 743012
FIXTURE_TIMESTAMP = "2025-01-01T00:00:00+00:00"
DEMO_MODEL = "replay-demo"

LABELS = (
    "anatomy",
    "biological_process",
    "cellular_component",
    "disease",
    "drug",
    "exposure",
    "gene/protein",
    "molecular_function",
    "pathway",
    "phenotype",
)

_VAR_PREFIX = {
    "anatomy": "an",
    "biological_process": "b",
    "cellular_component": "c",
    "disease": "d",
    "drug": "dr",
    "exposure": "e",
    "gene/protein": "g",
    "molecular_function": "m",
    "pathway": "p",
    "phenotype": "ph",
}

NAME_POOLS: dict[str, tuple[str, ...]] = {
    "disease": (
        "multiple sclerosis",
        "neuromyelitis optica",
        "Richter syndrome",
        "Abermann syndrome",
        "Calder disease",
        "Dreval syndrome",
        "Ellmore disease",
        "Farid syndrome",
        "glioptic neuritis",
        "Harwick disease",
        "idiopathic corvoleitis",
        "Jarlen myelopathy",
        "Kestler disease",
        "lumen tract atrophy",
        "Mersey fever",
        "neltrovan deficiency",
        "optic corridor syndrome",
        "Pellwick disease",
        "quell-cell anemia",
        "relsing encephalitis",
    ),
    "drug": (
        "interferon beta-1a",
        "alvistrane",
        "betacorin",
        "cladrixol",
        "dentramab",
        "eprovane",
        "fentrazine",
        "gliporide",
        "hexolamine",
        "ibrentinib",
        "jovantrel",
        "kelprofen",
        "lumetrexate",
        "mavorexant",
        "neproxidil",
        "orvantine",
        "pellcitabine",
        "quorifanib",
        "rastegravir",
        "selvodipine",
    ),
    "phenotype": (
        "muscle weakness",
        "blurred vision",
        "chronic fatigue",
        "tremor",
        "numbness in limbs",
        "joint stiffness",
        "memory lapses",
        "dizziness",
        "skin rash",
        "hair thinning",
        "night sweats",
        "loss of balance",
        "slurred speech",
        "light sensitivity",
        "muscle spasms",
        "dry mouth",
        "tingling hands",
        "reduced grip strength",
        "double vision",
        "heat intolerance",
    ),
    "gene/protein": (
        "POMC",
        "APOE",
        "BRK11",
        "CML4",
        "DST22",
        "ERN7",
        "FLT19",
        "GPR201",
        "HEXA2",
        "IRF15",
        "JAK8",
        "KCN30",
        "LRP16",
        "MTOR3",
        "NOS9",
        "OPA6",
        "PDE21",
        "QSOX5",
        "RHO14",
        "SDC7",
    ),
    "anatomy": (
        "optic nerve",
        "spinal cord",
        "frontal cortex",
        "cerebellum",
        "brain stem",
        "thalamus",
        "hippocampus",
        "corpus callosum",
        "peripheral nerve",
        "retina",
        "skeletal muscle",
        "cardiac muscle",
        "renal cortex",
        "hepatic lobule",
        "thymus",
        "bone marrow",
        "lymph node",
        "adrenal gland",
        "pituitary gland",
        "choroid plexus",
    ),
    "cellular_component": (
        "myelin sheath",
        "axon terminal",
        "cell membrane",
        "mitochondrion",
        "nucleolus",
        "ribosome",
        "endoplasmic reticulum",
        "golgi apparatus",
        "lysosome",
        "peroxisome",
        "synaptic vesicle",
        "dendritic spine",
        "nuclear envelope",
        "cytoskeleton",
        "flagellum",
        "centrosome",
        "proteasome",
        "vacuole",
        "gap junction",
        "tight junction",
    ),
    "pathway": (
        "myelin repair pathway",
        "cytokine signaling pathway",
        "axon guidance pathway",
        "complement cascade",
        "oxidative stress response",
        "apoptosis signaling",
        "glutamate cycling pathway",
        "lipid metabolism pathway",
        "antigen presentation pathway",
        "neurotrophin signaling",
        "calcium signaling pathway",
        "insulin signaling pathway",
        "wnt signaling pathway",
        "notch signaling pathway",
        "interferon response pathway",
        "autophagy pathway",
        "dna repair pathway",
        "heat shock response",
        "iron homeostasis pathway",
        "serotonin synthesis pathway",
    ),
    "molecular_function": (
        "kinase activity",
        "atp binding",
        "dna binding",
        "rna binding",
        "ion channel activity",
        "receptor binding",
        "protease activity",
        "oxidoreductase activity",
        "transporter activity",
        "ligase activity",
        "phosphatase activity",
        "gtpase activity",
        "helicase activity",
        "methyltransferase activity",
        "acetyltransferase activity",
        "hydrolase activity",
        "isomerase activity",
        "lipase activity",
        "chaperone binding",
        "antigen binding",
    ),
    "exposure": (
        "tobacco smoke",
        "ultraviolet radiation",
        "lead dust",
        "asbestos fibers",
        "benzene vapor",
        "pesticide residue",
        "diesel exhaust",
        "mercury vapor",
        "silica dust",
        "ozone",
        "formaldehyde",
        "cadmium particles",
        "arsenic in water",
        "mold spores",
        "radon gas",
        "chlorinated solvents",
        "wood smoke",
        "nickel compounds",
        "perfluorinated compounds",
        "bisphenol a",
    ),
    "biological_process": (
        "inflammatory response",
        "myelination",
        "axon regeneration",
        "immune cell activation",
        "synaptic pruning",
        "neurotransmitter release",
        "cell migration",
        "protein folding",
        "lipid transport",
        "glucose metabolism",
        "oxidative phosphorylation",
        "antigen processing",
        "t cell differentiation",
        "b cell maturation",
        "cytokine production",
        "blood brain barrier maintenance",
        "angiogenesis",
        "apoptotic signaling",
        "autophagosome assembly",
        "calcium homeostasis",
    ),
}


@dataclass(frozen=True)
class RelationSpec:
    """One relation type: raw ingestion name, final display name, endpoint
    labels, whether it is a bidirectional self-relation, and the number of
    random edges to generate on top of the planted ones."""

    raw_name: str
    display_name: str
    source_label: str
    target_label: str
    bidirectional: bool = False
    fill_count: int = 24


RELATION_SPECS: tuple[RelationSpec, ...] = (
    RelationSpec("contraindication", "contraindication", "drug", "disease"),
    RelationSpec("indication", "indication", "drug", "disease"),
    RelationSpec("drug_effect", "side effect", "drug", "phenotype"),
    RelationSpec("ppi", "protein-protein interaction", "gene/protein", "gene/protein", bidirectional=True),
    RelationSpec("phenotype_protein", "gene/protein associated with phenotype", "gene/protein", "phenotype"),
    RelationSpec("disease_phenotype_positive", "phenotype present in disease", "disease", "phenotype"),
    RelationSpec("disease_protein", "gene/protein associated with disease", "gene/protein", "disease"),
    RelationSpec("disease_disease", "related to disease", "disease", "disease", bidirectional=True),
    RelationSpec("molfunc_protein", "interacts with molecular function", "gene/protein", "molecular_function"),
    RelationSpec("cellcomp_protein", "interacts with cellular component", "gene/protein", "cellular_component"),
    RelationSpec("bioprocess_protein", "interacts with biological process", "gene/protein", "biological_process"),
    RelationSpec("exposure_protein", "interacts with gene_protein", "exposure", "gene/protein"),
    RelationSpec("exposure_disease", "disease linked to exposure", "exposure", "disease"),
    RelationSpec("exposure_exposure", "related to exposure", "exposure", "exposure", bidirectional=True),
    # these two were born with their display names; renaming them would
    # collide with the protein-side relations of the same display name
    RelationSpec("interacts with biological process", "interacts with biological process", "exposure", "biological_process"),
    RelationSpec("interacts with molecular function", "interacts with molecular function", "exposure", "molecular_function"),
    RelationSpec("pathway_protein", "interacts with pathway", "gene/protein", "pathway"),
    RelationSpec("anatomy_protein_present", "expression present in anatomical structure", "gene/protein", "anatomy"),
    RelationSpec("anatomy_protein_absent", "expression absent in anatomical structure", "gene/protein", "anatomy", fill_count=16),
)

# edges the flagship questions rely on: (source_name, display_relation, target_name)
PLANTED_EDGES: tuple[tuple[str, str, str], ...] = (
    ("alvistrane", "contraindication", "multiple sclerosis"),
    ("cladrixol", "contraindication", "multiple sclerosis"),
    ("interferon beta-1a", "indication", "multiple sclerosis"),
    ("betacorin", "indication", "Richter syndrome"),
    ("betacorin", "side effect", "chronic fatigue"),
    ("betacorin", "side effect", "tremor"),
    ("POMC", "gene/protein associated with phenotype", "muscle weakness"),
    ("POMC", "gene/protein associated with phenotype", "blurred vision"),
    ("neuromyelitis optica", "phenotype present in disease", "muscle weakness"),
    ("neuromyelitis optica", "phenotype present in disease", "blurred vision"),
    ("tobacco smoke", "disease linked to exposure", "multiple sclerosis"),
    ("ultraviolet radiation", "disease linked to exposure", "multiple sclerosis"),
    ("tobacco smoke", "interacts with gene_protein", "BRK11"),
    ("ultraviolet radiation", "interacts with gene_protein", "APOE"),
    ("BRK11", "interacts with pathway", "cytokine signaling pathway"),
    ("APOE", "interacts with pathway", "myelin repair pathway"),
    ("APOE", "interacts with biological process", "inflammatory response"),
    ("tobacco smoke", "interacts with biological process", "inflammatory response"),
)


def fixture_transform_config() -> TransformConfig:
    renames = {
        spec.raw_name: spec.display_name
        for spec in RELATION_SPECS
        if spec.raw_name != spec.display_name
    }
    return TransformConfig(
        relation_renames=renames,
        drop_reverse_duplicates=True,
        bidirectional_self_relations=frozenset(
            spec.display_name for spec in RELATION_SPECS if spec.bidirectional
        ),
    )


def _build_nodes() -> tuple[list[GraphNode], dict[str, str]]:
    nodes: list[GraphNode] = []
    id_by_name: dict[str, str] = {}
    counter = 1
    for label in LABELS:
        for name in NAME_POOLS[label]:
            node_id = f"n{counter:04d}"
            nodes.append(GraphNode(id=node_id, label=label, name=name))
            id_by_name[name] = node_id
            counter += 1
    return nodes, id_by_name


def build_fixture_graph() -> tuple[PropertyGraph, TransformConfig, PropertyGraph]:
    """Return (raw_graph, transform_config, final_graph).

    The raw variant carries pre-rename relation names and every non-self edge
    in both directions; applying the transform config to it reproduces the
    final graph exactly.
    """
    nodes, id_by_name = _build_nodes()
    rng = random.Random(FIXTURE_SEED)

    display_edges: list[tuple[str, str, str]] = []  # ids: (source, relation, target)
    seen: set[tuple[str, str, str]] = set()

    def add(source_id: str, relation: str, target_id: str) -> None:
        key = (source_id, relation, target_id)
        if key in seen:
            return
        seen.add(key)
        display_edges.append(key)

    label_by_name = {
        name: label for label in LABELS for name in NAME_POOLS[label]
    }
    planted_by_spec: dict[tuple[str, str], list[tuple[str, str, str]]] = {}
    for source_name, relation, target_name in PLANTED_EDGES:
        key = (relation, label_by_name[source_name])
        planted_by_spec.setdefault(key, []).append(
            (id_by_name[source_name], relation, id_by_name[target_name])
        )

    for spec in RELATION_SPECS:
        for edge in planted_by_spec.get((spec.display_name, spec.source_label), ()):
            add(*edge)
        source_pool = [id_by_name[n] for n in NAME_POOLS[spec.source_label]]
        target_pool = [id_by_name[n] for n in NAME_POOLS[spec.target_label]]
        added = 0
        while added < spec.fill_count:
            source = rng.choice(source_pool)
            target = rng.choice(target_pool)
            if source == target:
                continue
            key = (source, spec.display_name, target)
            reverse = (target, spec.display_name, source)
            if key in seen or reverse in seen:
                continue
            add(*key)
            if spec.bidirectional:
                add(*reverse)
            added += 1

    final = PropertyGraph(
        nodes, [GraphEdge(s, r, t) for s, r, t in display_edges]
    )

    cfg = fixture_transform_config()
    # two specs can share a display name (e.g. protein- and exposure-side
    # "interacts with ..."), so the raw name depends on the source label too
    raw_name_of = {
        (spec.display_name, spec.source_label): spec.raw_name for spec in RELATION_SPECS
    }
    label_of = {n.id: n.label for n in nodes}
    raw_edges: list[GraphEdge] = []
    for source, relation, target in display_edges:
        raw = raw_name_of[(relation, label_of[source])]
        raw_edges.append(GraphEdge(source, raw, target))
        if label_of[source] != label_of[target]:
            # pre-transform data carries every cross-label edge both ways
            raw_edges.append(GraphEdge(target, raw, source))
    raw_graph = PropertyGraph(nodes, raw_edges)

    assert apply_transforms(raw_graph, cfg) == final
    return raw_graph, cfg, final


# ---------------------------------------------------------------------------
# Question recipes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PathStep:
    relation: str
    forward: bool  # True: the edge runs from the lower chain position to the higher


@dataclass(frozen=True)
class QuestionRecipe:
    structure: int
    labels: tuple[str, ...]
    steps: tuple[PathStep, ...]
    anchor_positions: tuple[int, ...]
    answer_position: int
    question: str  # {a} = first anchor name, {b} = second


RECIPES: tuple[QuestionRecipe, ...] = (
    # structure 1: one direct relationship
    QuestionRecipe(1, ("disease", "drug"), (PathStep("contraindication", False),), (0,), 1,
                   "What are the names of the drugs that are contraindicated when a patient has {a}?"),
    QuestionRecipe(1, ("disease", "drug"), (PathStep("indication", False),), (0,), 1,
                   "Which drugs are indicated for the treatment of {a}?"),
    QuestionRecipe(1, ("drug", "phenotype"), (PathStep("side effect", True),), (0,), 1,
                   "What side effects does the drug {a} have?"),
    QuestionRecipe(1, ("gene/protein", "pathway"), (PathStep("interacts with pathway", True),), (0,), 1,
                   "Which pathways does the gene {a} interact with?"),
    QuestionRecipe(1, ("disease", "exposure"), (PathStep("disease linked to exposure", False),), (0,), 1,
                   "Which exposures are linked to {a}?"),
    QuestionRecipe(1, ("disease", "gene/protein"), (PathStep("gene/protein associated with disease", False),), (0,), 1,
                   "Which genes or proteins are associated with {a}?"),
    QuestionRecipe(1, ("gene/protein", "anatomy"), (PathStep("expression present in anatomical structure", True),), (0,), 1,
                   "In which anatomical structures is the gene {a} expressed?"),
    # structure 2: one entity connected to two others; the answer is a leaf
    QuestionRecipe(2, ("disease", "drug", "phenotype"),
                   (PathStep("indication", False), PathStep("side effect", True)), (0,), 2,
                   "What side effects does a drug have that is indicated for {a}?"),
    QuestionRecipe(2, ("disease", "drug", "phenotype"),
                   (PathStep("contraindication", False), PathStep("side effect", True)), (0,), 2,
                   "What are the side effects of the drugs that are contraindicated for {a}?"),
    QuestionRecipe(2, ("disease", "gene/protein", "pathway"),
                   (PathStep("gene/protein associated with disease", False), PathStep("interacts with pathway", True)), (0,), 2,
                   "Which pathways involve the genes that are associated with {a}?"),
    QuestionRecipe(2, ("phenotype", "gene/protein", "biological_process"),
                   (PathStep("gene/protein associated with phenotype", False), PathStep("interacts with biological process", True)), (0,), 2,
                   "Which biological processes involve the genes associated with the phenotype {a}?"),
    QuestionRecipe(2, ("anatomy", "gene/protein", "molecular_function"),
                   (PathStep("expression present in anatomical structure", False), PathStep("interacts with molecular function", True)), (0,), 2,
                   "Which molecular functions do the genes expressed in the {a} interact with?"),
    # structure 3: a chain of three with both ends anchored; the answer sits in the middle
    QuestionRecipe(3, ("gene/protein", "phenotype", "disease"),
                   (PathStep("gene/protein associated with phenotype", True), PathStep("phenotype present in disease", False)), (0, 2), 1,
                   "What are phenotypes that gene {a} is associated with that also occur in {b}?"),
    QuestionRecipe(3, ("exposure", "biological_process", "gene/protein"),
                   (PathStep("interacts with biological process", True), PathStep("interacts with biological process", False)), (0, 2), 1,
                   "Which biological processes interact with both the exposure {a} and the gene {b}?"),
    QuestionRecipe(3, ("drug", "disease", "drug"),
                   (PathStep("indication", True), PathStep("contraindication", False)), (0, 2), 1,
                   "For which diseases is {a} indicated while {b} is contraindicated?"),
    QuestionRecipe(3, ("drug", "phenotype", "gene/protein"),
                   (PathStep("side effect", True), PathStep("gene/protein associated with phenotype", False)), (0, 2), 1,
                   "Which side effects of {a} are phenotypes associated with the gene {b}?"),
    # structure 4: a chain of four, anchored at one end; the answer is the far end
    QuestionRecipe(4, ("disease", "exposure", "gene/protein", "pathway"),
                   (PathStep("disease linked to exposure", False), PathStep("interacts with gene_protein", True), PathStep("interacts with pathway", True)), (0,), 3,
                   "What pathways do the exposures that can lead to {a} interact with?"),
    QuestionRecipe(4, ("disease", "drug", "phenotype", "disease"),
                   (PathStep("indication", False), PathStep("side effect", True), PathStep("phenotype present in disease", False)), (0,), 3,
                   "Which diseases show the phenotypes that occur as side effects of drugs indicated for {a}?"),
    QuestionRecipe(4, ("gene/protein", "gene/protein", "phenotype", "disease"),
                   (PathStep("protein-protein interaction", True), PathStep("gene/protein associated with phenotype", True), PathStep("phenotype present in disease", False)), (0,), 3,
                   "Which diseases show phenotypes associated with the interaction partners of the gene {a}?"),
    QuestionRecipe(4, ("anatomy", "gene/protein", "biological_process", "exposure"),
                   (PathStep("expression present in anatomical structure", False), PathStep("interacts with biological process", True), PathStep("interacts with biological process", False)), (0,), 3,
                   "Which exposures affect the biological processes of genes expressed in the {a}?"),
    # structure 5: a chain of four anchored at both ends; the answer is next to the first anchor
    QuestionRecipe(5, ("gene/protein", "biological_process", "exposure", "disease"),
                   (PathStep("interacts with biological process", True), PathStep("interacts with biological process", False), PathStep("disease linked to exposure", True)), (0, 3), 1,
                   "Which biological processes are affected by the gene {a} which are also affected by an exposure to something that is linked to {b}?"),
    QuestionRecipe(5, ("drug", "phenotype", "gene/protein", "anatomy"),
                   (PathStep("side effect", True), PathStep("gene/protein associated with phenotype", False), PathStep("expression present in anatomical structure", True)), (0, 3), 1,
                   "Which side effects of {a} are associated with genes expressed in the {b}?"),
    QuestionRecipe(5, ("exposure", "disease", "gene/protein", "pathway"),
                   (PathStep("disease linked to exposure", True), PathStep("gene/protein associated with disease", False), PathStep("interacts with pathway", True)), (0, 3), 1,
                   "Which diseases linked to the exposure {a} have genes associated with them that interact with the {b}?"),
)

# the anchors that make each structure's flagship question the ones the system
# demos with; they are guaranteed by the planted edges
FLAGSHIP_ANCHORS: dict[int, tuple[str, ...]] = {
    1: ("multiple sclerosis",),
    2: ("Richter syndrome",),
    3: ("POMC", "neuromyelitis optica"),
    4: ("multiple sclerosis",),
    5: ("APOE", "multiple sclerosis"),
}


def _chain_bindings(
    graph: PropertyGraph,
    labels: tuple[str, ...],
    steps: tuple[PathStep, ...],
    fixed_names: dict[int, str],
) -> list[tuple[str, ...]]:
    """Enumerate node-id chains satisfying the labels, steps, and name pins.

    Pure edge-list walking -- no shared machinery with the executor. The same
    edge instance is not used twice within one chain.
    """
    candidates: list[list[str]] = []
    for position, label in enumerate(labels):
        pinned = fixed_names.get(position)
        ids = [
            n.id
            for n in graph.nodes
            if n.label == label and (pinned is None or n.name == pinned)
        ]
        candidates.append(ids)

    chains: list[tuple[str, ...]] = []

    def walk(position: int, chain: list[str], used: set[tuple[str, str, str]]) -> None:
        if position == len(labels):
            chains.append(tuple(chain))
            return
        for node_id in candidates[position]:
            if position == 0:
                walk(1, [node_id], set())
                continue
            step = steps[position - 1]
            prev = chain[-1]
            edge = (
                (prev, step.relation, node_id)
                if step.forward
                else (node_id, step.relation, prev)
            )
            if edge in used or not graph.has_edge(*edge):
                continue
            used.add(edge)
            chain.append(node_id)
            walk(position + 1, chain, used)
            chain.pop()
            used.discard(edge)

    walk(0, [], set())
    return chains


def _answers_for(
    graph: PropertyGraph, recipe: QuestionRecipe, anchors: tuple[str, ...]
) -> frozenset[str]:
    fixed = {
        position: anchors[i] for i, position in enumerate(recipe.anchor_positions)
    }
    chains = _chain_bindings(graph, recipe.labels, recipe.steps, fixed)
    return frozenset(
        graph.node(chain[recipe.answer_position]).name for chain in chains
    )


def _variables_for(labels: tuple[str, ...]) -> list[str]:
    counts: dict[str, int] = {}
    out = []
    for label in labels:
        prefix = _VAR_PREFIX[label]
        counts[prefix] = counts.get(prefix, 0) + 1
        out.append(prefix if counts[prefix] == 1 else f"{prefix}{counts[prefix]}")
    return out


def gold_query_ast(recipe: QuestionRecipe, anchors: tuple[str, ...]) -> CypherQuery:
    variables = _variables_for(recipe.labels)
    fixed = {
        position: anchors[i] for i, position in enumerate(recipe.anchor_positions)
    }
    nodes = [
        NodePattern(
            variable=variables[i],
            label=label,
            name_filter=fixed.get(i),
        )
        for i, label in enumerate(recipe.labels)
    ]
    rels = [
        RelPattern(
            relation=step.relation,
            direction=LEFT_TO_RIGHT if step.forward else RIGHT_TO_LEFT,
        )
        for step in recipe.steps
    ]
    return CypherQuery(
        patterns=[PathPattern(nodes=nodes, relationships=rels)],
        return_items=[ReturnItem(variable=variables[recipe.answer_position], property="name")],
    )


def _anchor_candidates(
    graph: PropertyGraph, recipe: QuestionRecipe
) -> list[tuple[str, ...]]:
    pools = [NAME_POOLS[recipe.labels[p]] for p in recipe.anchor_positions]
    combos: list[tuple[str, ...]] = []
    if len(pools) == 1:
        combos = [(name,) for name in pools[0]]
    else:
        combos = [(a, b) for a in pools[0] for b in pools[1] if a != b]
    out = []
    for combo in combos:
        if _answers_for(graph, recipe, combo):
            out.append(combo)
    return out


def build_fixture_benchmark(graph: PropertyGraph, per_structure: int = 10) -> list[dict]:
    """Select question items per structure: the flagship question first, then
    a deterministic round-robin over the structure's recipes."""
    items: list[dict] = []
    for structure in (1, 2, 3, 4, 5):
        recipes = [r for r in RECIPES if r.structure == structure]
        candidates = {id(r): _anchor_candidates(graph, r) for r in recipes}

        chosen: list[tuple[QuestionRecipe, tuple[str, ...]]] = []
        flagship = (recipes[0], FLAGSHIP_ANCHORS[structure])
        if flagship[1] not in candidates[id(recipes[0])]:
            raise AssertionError(
                f"flagship anchors {flagship[1]} have no answers for structure {structure}"
            )
        chosen.append(flagship)
        used = {flagship}
        cursor = {id(r): 0 for r in recipes}
        recipe_index = 1 % len(recipes)
        while len(chosen) < per_structure:
            recipe = recipes[recipe_index % len(recipes)]
            recipe_index += 1
            pool = candidates[id(recipe)]
            i = cursor[id(recipe)]
            while i < len(pool) and (recipe, pool[i]) in used:
                i += 1
            cursor[id(recipe)] = i + 1
            if i >= len(pool):
                continue
            pick = (recipe, pool[i])
            used.add(pick)
            chosen.append(pick)

        for index, (recipe, anchors) in enumerate(chosen, 1):
            answers = _answers_for(graph, recipe, anchors)
            question = recipe.question.format(
                a=anchors[0], b=anchors[1] if len(anchors) > 1 else ""
            )
            items.append(
                {
                    "id": f"s{structure}-{index:03d}",
                    "question": question,
                    "structure": structure,
                    "hops": len(recipe.steps),
                    "expected_answers": sorted(answers),
                    "gold_cypher": serialize_query(gold_query_ast(recipe, anchors)),
                }
            )
    return items


# ---------------------------------------------------------------------------
# Defect injection
# ---------------------------------------------------------------------------

REPAIRABLE_MUTATIONS = ("wrong_label", "reverse_direction", "bare_return")
UNREPAIRABLE_MUTATIONS = ("asterisk", "truncated_path")


def mutate_wrong_label(query: CypherQuery) -> CypherQuery:
    """Mislabel the first name-filtered node (the classic wrong-node-type error)."""
    q = copy.deepcopy(query)
    for pattern in q.patterns:
        for node in pattern.nodes:
            if node.name_filter is not None:
                node.label = "pathway" if node.label != "pathway" else "anatomy"
                return q
    raise ValueError("query has no name-filtered node to mislabel")


def mutate_reverse_direction(query: CypherQuery, schema: GraphSchema) -> CypherQuery:
    """Flip the first relationship whose reversed orientation is schema-invalid."""
    q = copy.deepcopy(query)
    for pattern in q.patterns:
        for i, rel in enumerate(pattern.relationships):
            left, right = pattern.nodes[i], pattern.nodes[i + 1]
            if left.label is None or right.label is None:
                continue
            if rel.direction == LEFT_TO_RIGHT:
                src, dst = left.label, right.label
            else:
                src, dst = right.label, left.label
            if not schema.has_triple(src, rel.relation, dst):
                continue
            if schema.has_triple(dst, rel.relation, src):
                continue  # both orientations valid: flipping would not be a defect
            rel.direction = (
                RIGHT_TO_LEFT if rel.direction == LEFT_TO_RIGHT else LEFT_TO_RIGHT
            )
            return q
    raise ValueError("query has no relationship whose flip is schema-invalid")


def mutate_bare_return(query: CypherQuery) -> CypherQuery:
    """Drop the .name property from every return item."""
    q = copy.deepcopy(query)
    for item in q.return_items:
        item.property = None
    return q


def apply_repairable_mutation(
    query: CypherQuery, kind: str, schema: GraphSchema
) -> CypherQuery:
    if kind == "wrong_label":
        return mutate_wrong_label(query)
    if kind == "reverse_direction":
        try:
            return mutate_reverse_direction(query, schema)
        except ValueError:
            return mutate_bare_return(query)
    if kind == "bare_return":
        return mutate_bare_return(query)
    raise ValueError(f"unknown mutation kind {kind!r}")


def apply_unrepairable_mutation(query: CypherQuery, kind: str) -> str:
    """Return mutated query *text* (these defects are not all representable
    in the AST)."""
    if kind == "asterisk":
        text = serialize_query(query)
        return text.replace("]-", "*]-", 1).replace("]->", "*]->", 1)
    if kind == "truncated_path":
        q = copy.deepcopy(query)
        first = q.patterns[0].nodes[0]
        q.patterns = [PathPattern(nodes=[first], relationships=[])]
        return serialize_query(q)
    raise ValueError(f"unknown mutation kind {kind!r}")


# ---------------------------------------------------------------------------
# Demo transcript + file output
# ---------------------------------------------------------------------------

SECTION_DEMO_DEFECTS: dict[str, str] = {
    # first item per structure answers with a defective query so the demo
    # shows the checker earning its keep; everything else answers with gold
    "s1-001": "worked_example",
    "s2-001": "reverse_direction",
    "s3-001": "wrong_label",
    "s4-001": "bare_return",
    "s5-001": "reverse_direction",
}

WORKED_EXAMPLE_FAULTY = (
    'MATCH (d:pathway {name:"multiple sclerosis"})-[:contraindication]->(dr:drug)\n'
    "RETURN dr;"
)


def build_demo_transcript(
    kb: KnowledgeBase, items: list[dict], template_body_dir: Path | None = None
) -> list[TranscriptEntry]:
    templates = {t.id: t for t in load_templates(template_body_dir)}
    zero_shot = templates["zero_shot"]
    entries = []
    for item in items:
        prompt = render_prompt(zero_shot, kb.schema_text, item["question"])
        defect = SECTION_DEMO_DEFECTS.get(item["id"])
        if defect == "worked_example":
            response = WORKED_EXAMPLE_FAULTY
        elif defect is not None:
            mutated = apply_repairable_mutation(
                parse_query(item["gold_cypher"]), defect, kb.schema
            )
            response = serialize_query(mutated)
        else:
            response = item["gold_cypher"]
        entries.append(
            TranscriptEntry(
                prompt_hash=prompt_hash(DEMO_MODEL, prompt),
                prompt=prompt,
                response=response,
                recorded_at=FIXTURE_TIMESTAMP,
            )
        )
    return entries


def write_fixture_files(out_dir: str | Path) -> dict[str, Path]:
    """Generate every fixture file. Deterministic: same bytes on every run."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    raw_graph, cfg, final = build_fixture_graph()
    kb = KnowledgeBase.from_graph(final)
    items = build_fixture_benchmark(final)

    paths = {}

    paths["graph.json"] = out / "graph.json"
    save_graph_json(final, paths["graph.json"])
    paths["graph_raw.json"] = out / "graph_raw.json"
    save_graph_json(raw_graph, paths["graph_raw.json"])

    paths["transforms.json"] = out / "transforms.json"
    paths["transforms.json"].write_text(
        json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    paths["benchmark.json"] = out / "benchmark.json"
    paths["benchmark.json"].write_text(
        json.dumps(items, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    tsv_dir = out / "tsv"
    tsv_dir.mkdir(exist_ok=True)
    paths["tsv/nodes.tsv"] = tsv_dir / "nodes.tsv"
    paths["tsv/nodes.tsv"].write_text(
        "".join(f"{n.id}\t{n.label}\t{n.name}\n" for n in final.nodes),
        encoding="utf-8",
    )
    paths["tsv/edges.tsv"] = tsv_dir / "edges.tsv"
    paths["tsv/edges.tsv"].write_text(
        "".join(f"{e.source_id}\t{e.relation}\t{e.target_id}\n" for e in final.edges),
        encoding="utf-8",
    )

    entries = build_demo_transcript(kb, items)
    paths["transcripts_demo.jsonl"] = out / "transcripts_demo.jsonl"
    paths["transcripts_demo.jsonl"].write_text(
        "".join(json.dumps(e.to_json_dict(), sort_keys=True) + "\n" for e in entries),
        encoding="utf-8",
    )

    paths["bench_config.json"] = out / "bench_config.json"
    paths["bench_config.json"].write_text(
        json.dumps(
            {
                "runs": [
                    {"model": DEMO_MODEL, "backend": "replay", "template": "zero_shot"}
                ]
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )

    paths["llm_config.json"] = out / "llm_config.json"
    paths["llm_config.json"].write_text(
        json.dumps(
            {"models": [{"name": DEMO_MODEL, "backend": "replay"}]},
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    return paths
