"""Relation classification, assemblage synthesis, and cartography assembly."""

from __future__ import annotations

import asyncio
import copy
import json
import logging
import re
from dataclasses import dataclass, field
from importlib import resources

import jsonschema

from .agents import AgentCall, AgentFailure, AgentRuntime, SchemaRegistry, aggregate_metrics
from .integrity import CitationShadow, UnionFind
from .lenses import LensReading, TheoreticalLens
from .records import PaperRecord
from .resonance import ConvergentAnomaly, RuptureEvent

log = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0.0"
DEFAULT_PAIR_CAP = 200

EDGE_TAXONOMY = {
    "constructive": ("extends", "builds-on", "borrows-method"),
    "critical": ("contradicts", "problematizes", "challenges"),
    "rhizomatic": ("paradigm-rupture",),
}
RENDER_HINTS = {"constructive": "solid", "critical": "dashed", "rhizomatic": "neon"}

EDGE_SCHEMA_ID = "relation-edge/v1"
ASSEMBLAGE_SCHEMA_ID = "assemblage/v1"

EDGE_SCHEMA = {
    "type": "object",
    "properties": {
        "edge_class": {"enum": sorted(EDGE_TAXONOMY)},
        "subtype": {"enum": sorted({s for subs in EDGE_TAXONOMY.values() for s in subs})},
        "justification": {"type": "string", "minLength": 1},
        "confidence": {"type": "number"},
    },
    "required": ["edge_class", "subtype", "justification", "confidence"],
    # Subtype must belong to its class; expressed in-schema so an
    # inconsistent reply takes the corrective-retry path.
    "oneOf": [
        {
            "properties": {
                "edge_class": {"const": cls},
                "subtype": {"enum": list(subs)},
            }
        }
        for cls, subs in sorted(EDGE_TAXONOMY.items())
    ],
}

ASSEMBLAGE_SCHEMA = {
    "type": "object",
    "properties": {
        "title": {"type": "string", "minLength": 1},
        "narrative": {"type": "string", "minLength": 1},
        "confidence": {"type": "number"},
    },
    "required": ["title", "narrative", "confidence"],
}

GERUND_TITLE = re.compile(r"^[A-Za-z]+ing\b")
FALLBACK_TITLE_PREFIX = "Becoming: "


def register_synthesis_schemas(registry: SchemaRegistry) -> None:
    registry.register(EDGE_SCHEMA_ID, EDGE_SCHEMA)
    registry.register(ASSEMBLAGE_SCHEMA_ID, ASSEMBLAGE_SCHEMA)


@dataclass(frozen=True)
class RelationEdge:
    from_id: str
    to_id: str
    edge_class: str
    subtype: str
    justification: str
    confidence: float

    @property
    def render_hint(self) -> str:
        return RENDER_HINTS[self.edge_class]

    def to_dict(self) -> dict:
        return {
            "from_id": self.from_id,
            "to_id": self.to_id,
            "edge_class": self.edge_class,
            "subtype": self.subtype,
            "justification": self.justification,
            "confidence": self.confidence,
            "render_hint": self.render_hint,
        }


def make_edge(from_id, to_id, edge_class, subtype, justification, confidence) -> RelationEdge:
    if from_id == to_id:
        raise ValueError("self-loop edge")
    if edge_class not in EDGE_TAXONOMY:
        raise ValueError(f"unknown edge class {edge_class!r}")
    if subtype not in EDGE_TAXONOMY[edge_class]:
        raise ValueError(f"subtype {subtype!r} not in class {edge_class!r}")
    return RelationEdge(
        from_id=from_id,
        to_id=to_id,
        edge_class=edge_class,
        subtype=subtype,
        justification=justification,
        confidence=min(1.0, max(0.0, float(confidence))),
    )


@dataclass
class KnowledgeGraph:
    nodes: dict[str, bool] = field(default_factory=dict)  # paper id -> heterodox flag
    edges: list[RelationEdge] = field(default_factory=list)

    def add_edge(self, edge: RelationEdge) -> bool:
        if edge.from_id not in self.nodes or edge.to_id not in self.nodes:
            raise ValueError("edge endpoint not in graph")
        key = (edge.from_id, edge.to_id, edge.subtype)
        if any((e.from_id, e.to_id, e.subtype) == key for e in self.edges):
            return False
        self.edges.append(edge)
        return True

    def endpoint_pairs(self) -> list[tuple[str, str]]:
        return [(e.from_id, e.to_id) for e in self.edges]

    def to_dict(self) -> dict:
        return {
            "nodes": [
                {"id": pid, "heterodox_flag": flag} for pid, flag in sorted(self.nodes.items())
            ],
            "edges": [e.to_dict() for e in self.edges],
        }


def validate_graph(graph: KnowledgeGraph) -> None:
    """Graph-wide invariant scan; raises on the first violation."""
    seen = set()
    for edge in graph.edges:
        if edge.from_id == edge.to_id:
            raise ValueError(f"self-loop on {edge.from_id}")
        if edge.from_id not in graph.nodes or edge.to_id not in graph.nodes:
            raise ValueError("dangling edge endpoint")
        if edge.subtype not in EDGE_TAXONOMY[edge.edge_class]:
            raise ValueError(f"subtype {edge.subtype!r} inconsistent with {edge.edge_class!r}")
        if edge.render_hint != RENDER_HINTS[edge.edge_class]:
            raise ValueError("render hint drifted from edge class")
        key = (edge.from_id, edge.to_id, edge.subtype)
        if key in seen:
            raise ValueError(f"duplicate edge {key}")
        seen.add(key)


# --- Candidate pair policy ---------------------------------------------------


def _pair_orientation(a: PaperRecord, b: PaperRecord) -> tuple[str, str]:
    """Directed from the later work to the earlier (ties by id)."""

    def key(p: PaperRecord):
        return (p.year if p.year is not None else -1, p.id)

    earlier, later = sorted((a, b), key=key)
    return later.id, earlier.id


def candidate_pairs(
    corpus: list[PaperRecord],
    shadow: CitationShadow,
    anomalies: list[ConvergentAnomaly],
    cap: int = DEFAULT_PAIR_CAP,
) -> list[tuple[str, str]]:
    """Evidenced ordered pairs: citation-shadow edges first, then co-membership
    pairs from anomalies by intensity, deduplicated and capped."""
    by_id = {p.id: p for p in corpus}
    pairs: list[tuple[str, str]] = []
    seen_unordered: set[frozenset[str]] = set()

    def push(pair: tuple[str, str]) -> None:
        key = frozenset(pair)
        if len(key) < 2 or key in seen_unordered:
            return
        seen_unordered.add(key)
        pairs.append(pair)

    for citing, anchor in shadow.shadow_edges:
        if citing in by_id and anchor in by_id:
            push((citing, anchor))
    for anomaly in anomalies:
        members = [pid for pid in anomaly.paper_ids if pid in by_id]
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                push(_pair_orientation(by_id[members[i]], by_id[members[j]]))
    return pairs[:cap]


# --- Edge classification ------------------------------------------------------


def edge_prompt(a: PaperRecord, b: PaperRecord, tensions: list[str]) -> str:
    tension_text = "\n".join(f"- {t}" for t in tensions) or "- (none recorded)"
    classes = "; ".join(f"{cls}: {', '.join(subs)}" for cls, subs in sorted(EDGE_TAXONOMY.items()))
    return (
        "Relation classification\n"
        f"from: {a.id} | {a.title} ({a.year if a.year is not None else 'n.d.'})\n"
        f"from abstract: {a.abstract_text or '(none)'}\n"
        f"to: {b.id} | {b.title} ({b.year if b.year is not None else 'n.d.'})\n"
        f"to abstract: {b.abstract_text or '(none)'}\n"
        f"lens tensions in context:\n{tension_text}\n"
        f"Classify the from->to relationship. Classes and subtypes: {classes}.\n"
        "Respond with one JSON object: {\"edge_class\", \"subtype\", "
        "\"justification\" (one sentence), \"confidence\": 0..1}."
    )


async def classify_edge(
    runtime: AgentRuntime,
    pair: tuple[str, str],
    corpus_by_id: dict[str, PaperRecord],
    context_tensions: list[str],
) -> RelationEdge:
    a, b = corpus_by_id[pair[0]], corpus_by_id[pair[1]]
    response = await runtime.call(
        AgentCall(
            agent_name="rhizome-builder",
            prompt=edge_prompt(a, b, context_tensions),
            response_schema_id=EDGE_SCHEMA_ID,
        )
    )
    payload = response.payload
    return make_edge(
        a.id,
        b.id,
        payload["edge_class"],
        payload["subtype"],
        payload["justification"],
        response.confidence,
    )


async def classify_pairs(
    runtime: AgentRuntime,
    pairs: list[tuple[str, str]],
    corpus: list[PaperRecord],
    readings: list[LensReading],
) -> tuple[list[RelationEdge], list[tuple[str, str]]]:
    """Classify pairs concurrently; failed pairs are skipped, not fatal."""
    by_id = {p.id: p for p in corpus}
    tensions_by_paper: dict[str, list[str]] = {}
    for reading in readings:
        tensions_by_paper.setdefault(reading.paper_id, []).extend(reading.tensions)

    async def attempt(pair):
        context = tensions_by_paper.get(pair[0], []) + tensions_by_paper.get(pair[1], [])
        try:
            return await classify_edge(runtime, pair, by_id, context)
        except AgentFailure as exc:
            log.warning("edge %s -> %s skipped: %s", pair[0], pair[1], exc)
            return pair

    results = await asyncio.gather(*(attempt(p) for p in pairs))
    edges = [r for r in results if isinstance(r, RelationEdge)]
    skipped = [r for r in results if not isinstance(r, RelationEdge)]
    return edges, skipped


# --- Assemblages --------------------------------------------------------------


@dataclass
class Assemblage:
    title: str
    narrative: str
    anomaly_refs: list[str]
    paper_ids: list[str]

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "narrative": self.narrative,
            "anomaly_refs": list(self.anomaly_refs),
            "paper_ids": list(self.paper_ids),
        }


def is_gerund_led(title: str) -> bool:
    return bool(GERUND_TITLE.match(title))


def group_anomalies(anomalies: list[ConvergentAnomaly]) -> list[list[ConvergentAnomaly]]:
    """Anomalies sharing at least one paper merge into one group."""
    if not anomalies:
        return []
    uf = UnionFind([a.id for a in anomalies])
    owner: dict[str, str] = {}
    for anomaly in anomalies:
        for pid in anomaly.paper_ids:
            if pid in owner:
                uf.union(owner[pid], anomaly.id)
            else:
                owner[pid] = anomaly.id
    by_id = {a.id: a for a in anomalies}
    groups = [
        sorted((by_id[aid] for aid in members), key=lambda a: (-a.intensity, a.id))
        for members in uf.groups().values()
    ]
    groups.sort(key=lambda g: (-g[0].intensity, g[0].id))
    return groups


def assemblage_prompt(group: list[ConvergentAnomaly], corpus_by_id: dict[str, PaperRecord]) -> str:
    anomaly_lines = "\n".join(
        f"- {a.canonical_tension} (lenses: {', '.join(a.lens_names)}; intensity {a.intensity:.2f})"
        for a in group
    )
    paper_ids = sorted({pid for a in group for pid in a.paper_ids})
    paper_lines = "\n".join(
        f"- {pid}: {corpus_by_id[pid].title}" for pid in paper_ids if pid in corpus_by_id
    )
    return (
        "Assemblage synthesis\n"
        f"convergent anomalies:\n{anomaly_lines}\n"
        f"supporting papers:\n{paper_lines}\n"
        "Synthesize these into one provisional constellation. The title MUST "
        "begin with a present participle (an -ing word). The narrative is one "
        "paragraph in present-continuous voice describing what is becoming.\n"
        "Respond with one JSON object: {\"title\", \"narrative\", "
        "\"confidence\": 0..1}."
    )


TITLE_RETRY_SUFFIX = (
    "\n\nThe previous title did not begin with a present participle. "
    "Produce a new title whose first word ends in -ing."
)


async def build_assemblages(
    runtime: AgentRuntime,
    anomalies: list[ConvergentAnomaly],
    corpus: list[PaperRecord],
) -> list[Assemblage]:
    """One assemblage per anomaly group; titles coerced to gerund-led form."""
    corpus_by_id = {p.id: p for p in corpus}
    assemblages = []
    for group in group_anomalies(anomalies):
        prompt = assemblage_prompt(group, corpus_by_id)
        response = await runtime.call(
            AgentCall(agent_name="assemblage-builder", prompt=prompt,
                      response_schema_id=ASSEMBLAGE_SCHEMA_ID)
        )
        title = response.payload["title"].strip()
        narrative = response.payload["narrative"].strip()
        if not is_gerund_led(title):
            retry = await runtime.call(
                AgentCall(agent_name="assemblage-builder", prompt=prompt + TITLE_RETRY_SUFFIX,
                          response_schema_id=ASSEMBLAGE_SCHEMA_ID)
            )
            title = retry.payload["title"].strip()
            narrative = retry.payload["narrative"].strip()
            if not is_gerund_led(title):
                title = FALLBACK_TITLE_PREFIX + title
        assemblages.append(
            Assemblage(
                title=title,
                narrative=narrative,
                anomaly_refs=[a.id for a in group],
                paper_ids=sorted({pid for a in group for pid in a.paper_ids}),
            )
        )
    return assemblages


# --- Cartography ---------------------------------------------------------------


class CartographyConsistencyError(Exception):
    """Metadata totals disagreed with the independent aggregation: a bug."""


def corpus_summary(corpus: list[PaperRecord]) -> dict:
    per_source: dict[str, int] = {}
    for record in corpus:
        per_source[record.source.value] = per_source.get(record.source.value, 0) + 1
    return {
        "total": len(corpus),
        "per_source": dict(sorted(per_source.items())),
        "heterodox_count": sum(1 for r in corpus if r.heterodox_flag),
    }


def build_cartography(
    *,
    zone: str,
    lenses: list[TheoreticalLens],
    corpus: list[PaperRecord],
    anomalies: list[ConvergentAnomaly],
    rupture_events: list[RuptureEvent],
    graph: KnowledgeGraph,
    assemblages: list[Assemblage],
    readings: list[LensReading],
    call_records,
    agent_roster: list[str],
    topography: dict | None = None,
    topography_status: str = "pending",
    config: dict | None = None,
    run_id: str | None = None,
    seed: int | None = None,
) -> dict:
    """Assemble the unified output document and cross-check its metadata."""
    metrics = aggregate_metrics(call_records)
    check = {
        "input_tokens": sum(r.usage.input_tokens for r in call_records),
        "output_tokens": sum(r.usage.output_tokens for r in call_records),
    }
    if (
        metrics["totals"]["input_tokens"] != check["input_tokens"]
        or metrics["totals"]["output_tokens"] != check["output_tokens"]
    ):
        raise CartographyConsistencyError(
            f"token totals {metrics['totals']} disagree with re-summation {check}"
        )
    document = {
        "schema_version": SCHEMA_VERSION,
        "run_id": run_id,
        "zone": zone,
        "seed": seed,
        "config": config or {},
        "agent_roster": list(agent_roster),
        "lenses": [l.to_dict() for l in lenses],
        "corpus_summary": corpus_summary(corpus),
        "corpus": [p.to_dict() for p in corpus],
        "readings": [r.to_dict() for r in readings],
        "anomalies": [a.to_dict() for a in anomalies],
        "rupture_events": [e.to_dict() for e in rupture_events],
        "graph": graph.to_dict(),
        "assemblages": [a.to_dict() for a in assemblages],
        "topography": topography,
        "topography_status": topography_status,
        "metadata": {
            "per_agent": metrics["agents"],
            "totals": metrics["totals"],
            "calls": [r.to_dict() for r in call_records],
        },
    }
    return document


def load_cartography_schema() -> dict:
    text = resources.files("rhizome.schemas").joinpath("cartography.schema.json").read_text()
    return json.loads(text)


def validate_cartography(document: dict) -> None:
    jsonschema.validate(document, load_cartography_schema())


VOLATILE_KEYS = {"timestamp", "latency_ms", "generated_at", "run_id"}


def canonical_form(document):
    """Copy with volatile fields (timestamps, latencies, run ids) zeroed, for
    reproducibility comparison across runs."""
    doc = copy.deepcopy(document)

    def scrub(value):
        if isinstance(value, dict):
            for key in list(value):
                if key in VOLATILE_KEYS:
                    value[key] = None
                else:
                    scrub(value[key])
        elif isinstance(value, list):
            for item in value:
                scrub(item)

    scrub(doc)
    return doc


def serialize_cartography(document: dict) -> str:
    return json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False)


def parse_cartography(text: str) -> dict:
    return json.loads(text)
