"""Theoretical lens generation and parallel per-lens corpus reading."""

from __future__ import annotations

import asyncio
import logging
import re
from dataclasses import dataclass, field

from .agents import AgentCall, AgentRuntime, SchemaRegistry
from .integrity import normalize_match_text
from .records import PaperRecord

log = logging.getLogger(__name__)

DEFAULT_COUNT_RANGE = (3, 5)
DEFAULT_LENS_JACCARD_MAX = 0.2
DEFAULT_TOP_M = 50
GENERATION_ATTEMPTS = 3

LENS_SET_SCHEMA_ID = "lens-set/v1"
LENS_READING_SCHEMA_ID = "lens-reading/v1"

LENS_SET_SCHEMA = {
    "type": "object",
    "properties": {
        "lenses": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "description": {"type": "string", "minLength": 1},
                    "signal_vocabulary": {
                        "type": "array",
                        "minItems": 5,
                        "maxItems": 15,
                        "items": {"type": "string", "minLength": 1},
                    },
                    "rationale": {"type": "string"},
                },
                "required": ["name", "description", "signal_vocabulary", "rationale"],
            },
        },
        "confidence": {"type": "number"},
    },
    "required": ["lenses", "confidence"],
}

LENS_READING_SCHEMA = {
    "type": "object",
    "properties": {
        "tensions": {"type": "array", "items": {"type": "string"}},
        "relevance": {"type": "number"},
        "confidence": {"type": "number"},
    },
    "required": ["tensions", "relevance", "confidence"],
}


def register_lens_schemas(registry: SchemaRegistry) -> None:
    registry.register(LENS_SET_SCHEMA_ID, LENS_SET_SCHEMA)
    registry.register(LENS_READING_SCHEMA_ID, LENS_READING_SCHEMA)


class LensGenerationError(Exception):
    """Phase-1 failure: lens count or orthogonality unmet after retries."""


@dataclass(frozen=True)
class TheoreticalLens:
    name: str
    description: str
    signal_vocabulary: tuple[str, ...]
    rationale: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "signal_vocabulary": list(self.signal_vocabulary),
            "rationale": self.rationale,
        }


@dataclass
class LensReading:
    lens_name: str
    paper_id: str
    signal_hits: list[tuple[str, int]] = field(default_factory=list)
    tensions: list[str] = field(default_factory=list)
    relevance: float = 0.0
    confidence: float = 1.0

    def to_dict(self) -> dict:
        return {
            "lens_name": self.lens_name,
            "paper_id": self.paper_id,
            "signal_hits": [[t, c] for t, c in self.signal_hits],
            "tensions": list(self.tensions),
            "relevance": self.relevance,
            "confidence": self.confidence,
        }


def vocabulary_jaccard(a: TheoreticalLens, b: TheoreticalLens) -> float:
    sa, sb = set(a.signal_vocabulary), set(b.signal_vocabulary)
    if not sa and not sb:
        return 1.0
    return len(sa & sb) / len(sa | sb)


def lens_generation_prompt(zone: str, count_range: tuple[int, int]) -> str:
    lo, hi = count_range
    return (
        "You are the epistemology agent of a rhizomatic literature pipeline.\n"
        f"Phenomenon zone: {zone}\n"
        f"Generate between {lo} and {hi} mutually orthogonal theoretical lenses "
        "for reading an academic corpus on this zone. Each lens must carry a "
        "short name, a one-to-three sentence description, a signal vocabulary "
        "of 5 to 15 distinct lowercase terms, and a rationale for why it is "
        "orthogonal to its siblings. Vocabularies must barely overlap across "
        "lenses.\n"
        "Respond with one JSON object: {\"lenses\": [{\"name\", \"description\", "
        "\"signal_vocabulary\", \"rationale\"}], \"confidence\": 0..1}."
    )


def _parse_lens(entry: dict) -> TheoreticalLens:
    seen = set()
    vocab = []
    for term in entry["signal_vocabulary"]:
        t = term.strip().lower()
        if t and t not in seen:
            seen.add(t)
            vocab.append(t)
    return TheoreticalLens(
        name=entry["name"].strip(),
        description=entry["description"].strip(),
        signal_vocabulary=tuple(vocab),
        rationale=entry.get("rationale", "").strip(),
    )


async def generate_lenses(
    runtime: AgentRuntime,
    zone: str,
    count_range: tuple[int, int] = DEFAULT_COUNT_RANGE,
    jaccard_max: float = DEFAULT_LENS_JACCARD_MAX,
    attempts: int = GENERATION_ATTEMPTS,
) -> list[TheoreticalLens]:
    """Ask the epistemology agent for orthogonal lenses, retrying when the
    count contract or the vocabulary-overlap ceiling is violated."""
    if not zone.strip():
        raise ValueError("phenomenon zone must be non-empty")
    lo, hi = count_range
    prompt = lens_generation_prompt(zone, count_range)
    reasons: list[str] = []
    for attempt in range(1, attempts + 1):
        response = await runtime.call(
            AgentCall(agent_name="epistemology", prompt=prompt, response_schema_id=LENS_SET_SCHEMA_ID)
        )
        lenses = [_parse_lens(e) for e in response.payload["lenses"]]
        problem = _lens_set_problem(lenses, lo, hi, jaccard_max)
        if problem is None:
            return lenses
        reasons.append(f"attempt {attempt}: {problem}")
        log.info("lens generation retry (%s)", problem)
    raise LensGenerationError("; ".join(reasons))


def _lens_set_problem(lenses: list[TheoreticalLens], lo: int, hi: int, jaccard_max: float) -> str | None:
    if not lo <= len(lenses) <= hi:
        return f"lens count {len(lenses)} outside [{lo}, {hi}]"
    names = [l.name for l in lenses]
    if len(set(names)) != len(names):
        return "duplicate lens names"
    for i in range(len(lenses)):
        for j in range(i + 1, len(lenses)):
            jac = vocabulary_jaccard(lenses[i], lenses[j])
            if jac > jaccard_max:
                return (
                    f"vocabulary jaccard {jac:.3f} between "
                    f"{lenses[i].name!r} and {lenses[j].name!r} exceeds {jaccard_max}"
                )
    return None


# --- Deterministic signal prefilter -----------------------------------------


def _tokens(text: str) -> list[str]:
    return normalize_match_text(text).split()


def count_term(term: str, text_tokens: list[str]) -> int:
    """Whole-word occurrences of a (possibly multi-word) term."""
    needle = _tokens(term)
    if not needle:
        return 0
    n, m = len(text_tokens), len(needle)
    return sum(1 for i in range(n - m + 1) if text_tokens[i : i + m] == needle)


def prefilter_signals(
    lens: TheoreticalLens, corpus: list[PaperRecord]
) -> dict[str, list[tuple[str, int]]]:
    """Case-insensitive whole-word vocabulary counts over title + abstract.

    Purely lexical; no model involvement. Only terms that actually occur are
    listed.
    """
    hits: dict[str, list[tuple[str, int]]] = {}
    for paper in corpus:
        toks = _tokens(paper.text())
        found = [(term, count_term(term, toks)) for term in lens.signal_vocabulary]
        hits[paper.id] = [(t, c) for t, c in found if c > 0]
    return hits


def reading_prompt(lens: TheoreticalLens, paper: PaperRecord, hits: list[tuple[str, int]]) -> str:
    hit_text = ", ".join(f"{t}:{c}" for t, c in hits) or "(none)"
    return (
        "Lens reading request\n"
        f"lens: {lens.name}\n"
        f"lens description: {lens.description}\n"
        f"signal vocabulary: {', '.join(lens.signal_vocabulary)}\n"
        f"paper: {paper.id}\n"
        f"title: {paper.title}\n"
        f"abstract: {paper.abstract_text or '(none)'}\n"
        f"signal hits: {hit_text}\n"
        "Read this paper strictly through the lens. List the theoretical "
        "tensions or gaps it raises (short declarative statements), rate its "
        "relevance to the lens from 0 to 1, and rate your confidence from 0 "
        "to 1.\nRespond with one JSON object: {\"tensions\": [..], "
        "\"relevance\": 0..1, \"confidence\": 0..1}."
    )


def lens_agent_name(lens: TheoreticalLens) -> str:
    return f"lens-reader:{re.sub(r'[^A-Za-z0-9]+', '-', lens.name.lower()).strip('-')}"


def _ranking_key(paper: PaperRecord, total: int):
    year = paper.year if paper.year is not None else -1
    return (-total, -year, paper.id)


async def read_corpus(
    runtime: AgentRuntime,
    lens: TheoreticalLens,
    corpus: list[PaperRecord],
    top_m: int | None = DEFAULT_TOP_M,
) -> list[LensReading]:
    """One reading per paper: the top_m papers by signal-hit total get a
    model reading; the rest get a deterministic hit-score reading."""
    hits = prefilter_signals(lens, corpus)
    totals = {pid: sum(c for _, c in terms) for pid, terms in hits.items()}
    ranked = sorted(corpus, key=lambda p: _ranking_key(p, totals[p.id]))
    cut = len(ranked) if top_m is None else min(top_m, len(ranked))
    selected = ranked[:cut]
    max_total = max(totals.values(), default=0)

    async def llm_reading(paper: PaperRecord) -> LensReading:
        response = await runtime.call(
            AgentCall(
                agent_name=lens_agent_name(lens),
                prompt=reading_prompt(lens, paper, hits[paper.id]),
                response_schema_id=LENS_READING_SCHEMA_ID,
            )
        )
        payload = response.payload
        return LensReading(
            lens_name=lens.name,
            paper_id=paper.id,
            signal_hits=hits[paper.id],
            tensions=[t for t in payload["tensions"] if t.strip()],
            relevance=min(1.0, max(0.0, float(payload["relevance"]))),
            confidence=response.confidence,
        )

    llm_readings = await asyncio.gather(*(llm_reading(p) for p in selected))
    readings = {r.paper_id: r for r in llm_readings}
    for paper in ranked[cut:]:
        score = totals[paper.id] / max_total if max_total else 0.0
        readings[paper.id] = LensReading(
            lens_name=lens.name,
            paper_id=paper.id,
            signal_hits=hits[paper.id],
            tensions=[],
            relevance=score,
            confidence=1.0,
        )
    return [readings[p.id] for p in corpus]


async def read_corpus_all(
    runtime: AgentRuntime,
    lenses: list[TheoreticalLens],
    corpus: list[PaperRecord],
    top_m: int | None = DEFAULT_TOP_M,
) -> dict[str, list[LensReading]]:
    """All lenses concurrently; results keyed by lens name."""
    batches = await asyncio.gather(*(read_corpus(runtime, lens, corpus, top_m) for lens in lenses))
    return {lens.name: batch for lens, batch in zip(lenses, batches)}
