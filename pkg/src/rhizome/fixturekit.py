"""Deterministic offline scenario builder.

Synthesizes source-API fixtures in the public OpenAlex/arXiv shapes, scripts
every agent reply, and records the replies into the keyed fixture format the
runtime replays. Lets the full pipeline, the test suite, and the demos run
with no network and no model.
"""

from __future__ import annotations

import asyncio
import hashlib
import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .agents import CORRECTIVE_SUFFIX, AgentCall, FixtureProvider, ProviderConfig, TokenUsage, write_llm_fixture
from .ingestion.arxiv import ArxivClient
from .ingestion.openalex import OpenAlexClient
from .ingestion.transport import write_api_fixture
from .orchestrator.config import RunConfig
from .records import FetchQuery, SourceKind
from .resonance import DEFAULT_TRADITIONS
from .sidecar_client import write_injected_matrix
from .synthesis import TITLE_RETRY_SUFFIX

DEMO_ZONE = "energy-information nexus"

LENS_PAYLOAD = {
    "lenses": [
        {
            "name": "Thermodynamic Materialism",
            "description": "Reads information systems as energy-dissipating material processes.",
            "signal_vocabulary": [
                "entropy", "exergy", "thermodynamic", "dissipation",
                "energy flows", "heat", "negentropy",
            ],
            "rationale": "Grounds the zone in physical flows rather than discourse.",
        },
        {
            "name": "Algorithmic Governmentality",
            "description": "Treats data infrastructures as instruments of calculated rule.",
            "signal_vocabulary": [
                "algorithmic", "datafication", "surveillance", "governance",
                "platform", "metrics", "automation",
            ],
            "rationale": "Focuses on power and control, orthogonal to physical flows.",
        },
        {
            "name": "Post-Human Affect",
            "description": "Attends to bodies, sensation, and nonhuman agency in energy systems.",
            "signal_vocabulary": [
                "affect", "embodiment", "nonhuman", "sensory",
                "intensity", "assemblage", "body",
            ],
            "rationale": "Registers what metrics and thermodynamics both miss.",
        },
        {
            "name": "Infrastructural Ecology",
            "description": "Follows grids, maintenance, and breakdown as living systems.",
            "signal_vocabulary": [
                "infrastructure", "grid", "maintenance", "repair",
                "topology", "materiality", "breakdown",
            ],
            "rationale": "Material-systems view distinct from affect and governance.",
        },
    ],
    "confidence": 0.9,
}

# Cross-lens tension plan: three convergent anomalies plus one same-lens-only
# tension that must NOT become an anomaly.
TENSIONS = {
    ("Thermodynamic Materialism", "open-alex:W0003"): ["Energy data is power."],
    ("Algorithmic Governmentality", "open-alex:W0003"): ["energy data is power"],
    ("Algorithmic Governmentality", "open-alex:W0004"): ["Energy data is power"],
    ("Algorithmic Governmentality", "open-alex:W0010"): ["Metrics erase embodied practice."],
    ("Post-Human Affect", "arxiv:2401.00001"): ["metrics erase embodied practice"],
    ("Post-Human Affect", "open-alex:W0015"): ["Infrastructure fixes future imaginaries"],
    ("Infrastructural Ecology", "open-alex:W0015"): ["infrastructure fixes future imaginaries."],
    ("Infrastructural Ecology", "open-alex:W0007"): ["Grid maintenance is invisible labor"],
    ("Infrastructural Ecology", "open-alex:W0008"): ["Grid maintenance is invisible labor"],
}

ANOMALY_TITLE_RULES = [
    ("energy data is power", "Entangling energy and information flows"),
    # This group replies with a non-gerund title twice, exercising the
    # mechanical "Becoming: " fallback.
    ("metrics erase embodied practice", "The sensing of metrics"),
    ("infrastructure fixes future imaginaries", "Repairing future grids"),
]

_FILLER = [
    "study", "results", "analysis", "framework", "evidence", "systems",
    "transition", "coupling", "model", "field",
]

# Titles must be pairwise distinct under the trigram-Dice threshold, or the
# dedup pass would fold the synthetic corpus into a handful of records.
_OPENALEX_TITLES = [
    "Entropy accounting for municipal smart grids",
    "Sensor networks and the thermodynamics of computation",
    "Data centers as heat engines of the platform economy",
    "Algorithmic load balancing in district heating",
    "Surveillance capitalism meets the substation",
    "Metering publics: governance by kilowatt hour",
    "Maintenance work in renewable microgrid cooperatives",
    "Repair cultures of rural electrification",
    "Affective labor on the control room floor",
    "Embodied expertise in grid dispatch rooms",
    "Datafication of household energy practice",
    "Automated demand response and everyday autonomy",
    "Nonhuman agencies in storm outage recovery",
    "Exergy budgets for information infrastructure",
    "Imagined futures of the hydrogen backbone",
    "Platform intermediaries and energy market design",
    "Negentropy narratives in systems ecology",
    "Breakdown and brittleness in interdependent networks",
    "The sensory politics of wind farm siting",
    "Metrics that govern: benchmarking utility performance",
    "Dissipation and the limits of efficient computing",
    "Infrastructure as method in energy social science",
    "Bodies and batteries: affect in storage siting disputes",
    "Topology lessons from cascading blackouts",
    "Heat reuse and the moral economy of proximity",
]

_ARXIV_TITLES = [
    "Spectral methods for power flow state estimation",
    "Learning consumption embeddings from smart meter traces",
    "A graph neural approach to outage propagation",
    "Carbon aware scheduling for cloud workloads",
    "Thermal models of dense compute clusters",
    "Federated forecasting of distributed generation",
    "Anomaly detection in SCADA telemetry streams",
    "Market simulation for transactive energy pilots",
    "Reinforcement learning for volt var optimization",
    "Uncertainty quantification in demand flexibility",
]

_REENTRY_TITLE_BANKS = {
    "degrowth economics": [
        "Sufficiency first: energy descent and provisioning",
        "Post growth metrics for community energy",
    ],
    "indigenous ontologies": [
        "Relational land ethics and transmission corridors",
        "Sovereignty and the more than human grid",
    ],
}


def _h(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big")


def _unit_interval(text: str, lo: float = 0.6, hi: float = 0.95) -> float:
    return round(lo + (_h(text) % 1000) / 1000.0 * (hi - lo), 3)


def _vocab_words(paper_index: int) -> list[str]:
    lens = LENS_PAYLOAD["lenses"][paper_index % 4]
    vocab = [t for t in lens["signal_vocabulary"] if " " not in t]
    return [vocab[paper_index % len(vocab)], vocab[(paper_index + 1) % len(vocab)]]


def _abstract_words(paper_index: int) -> list[str]:
    words = ["the", "corpus", "of"] + _vocab_words(paper_index)
    words += [_FILLER[(paper_index + k) % len(_FILLER)] for k in range(6)]
    words += _vocab_words(paper_index)[:1]  # repeat one signal term
    return words


def _inverted_index(words: list[str]) -> dict[str, list[int]]:
    index: dict[str, list[int]] = {}
    for pos, word in enumerate(words):
        index.setdefault(word, []).append(pos)
    return index


_VENUES = [
    "Research Policy",
    "Energy Policy",
    "Journal of Cleaner Production",
    None,  # venueless -> heterodox
    "Organization Studies",
    "Unranked Working Paper Series",  # not in the table -> heterodox
]


def _openalex_work(index: int, hub_refs: bool) -> dict:
    wid = f"W{index:04d}"
    refs: list[str] = []
    if hub_refs:
        if 3 <= index <= 20:
            refs = ["https://openalex.org/W0001"]
        elif 21 <= index <= 25:
            refs = ["https://openalex.org/W0002"]
    venue = _VENUES[index % len(_VENUES)]
    title = _OPENALEX_TITLES[(index - 1) % len(_OPENALEX_TITLES)]
    work = {
        "id": f"https://openalex.org/{wid}",
        "doi": f"https://doi.org/10.5555/{wid.lower()}",
        "title": title,
        "display_name": title,
        "publication_year": 2015 + (index % 10),
        "cited_by_count": (index * 7) % 90,
        "abstract_inverted_index": _inverted_index(_abstract_words(index)),
        "authorships": [
            {"author": {"display_name": f"Author {index:02d}"}},
            {"author": {"display_name": f"Coauthor {index:02d}"}},
        ],
        "primary_location": {"source": {"display_name": venue} if venue else None},
        "referenced_works": refs,
    }
    return work


def _openalex_page(works: list[dict]) -> str:
    return json.dumps(
        {"meta": {"count": len(works), "page": 1, "per_page": len(works)}, "results": works},
        indent=1,
    )


def _arxiv_entry(native: str, title: str, summary_words: list[str], year: int) -> str:
    summary = " ".join(summary_words)
    return (
        "  <entry>\n"
        f"    <id>http://arxiv.org/abs/{native}v1</id>\n"
        f"    <updated>{year}-01-02T00:00:00Z</updated>\n"
        f"    <published>{year}-01-02T00:00:00Z</published>\n"
        f"    <title>{title}</title>\n"
        f"    <summary>{summary}</summary>\n"
        "    <author><name>A. Researcher</name></author>\n"
        "    <author><name>B. Scholar</name></author>\n"
        "  </entry>\n"
    )


def _arxiv_feed(entries: list[str]) -> str:
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        '<feed xmlns="http://www.w3.org/2005/Atom" '
        'xmlns:arxiv="http://arxiv.org/schemas/atom">\n'
        f"  <title>ArXiv Query Results</title>\n{''.join(entries)}</feed>\n"
    )


@dataclass
class DemoScenario:
    root: Path
    config: RunConfig
    main_corpus_size: int
    reentry_batch_size: int

    @property
    def llm_dir(self) -> Path:
        return self.root / "llm"

    @property
    def api_dir(self) -> Path:
        return self.root / "api"


def _write_main_fixtures(api_dir: Path, zone: str, limit: int, hub_refs: bool) -> list[str]:
    """Main-corpus pages for both sources; returns all paper ids."""
    oa_client = OpenAlexClient(None)
    ax_client = ArxivClient(None)
    query = FetchQuery(zone_text=zone, per_source_limit=limit)

    works = [_openalex_work(i, hub_refs) for i in range(1, 26)]
    write_api_fixture(
        api_dir, SourceKind.OPEN_ALEX.value,
        oa_client._page_url(query, 1, min(200, limit)), _openalex_page(works),
    )
    entries = []
    ids = [f"open-alex:W{i:04d}" for i in range(1, 26)]
    for j in range(1, 11):
        native = f"2401.{j:05d}"
        words = _abstract_words(j + 25)
        entries.append(_arxiv_entry(native, _ARXIV_TITLES[j - 1], words, 2023))
        ids.append(f"arxiv:{native}")
    write_api_fixture(
        api_dir, SourceKind.ARXIV.value,
        ax_client._page_url(query, 0, min(100, limit)), _arxiv_feed(entries),
    )
    return ids


def _write_reentry_fixtures(api_dir: Path, zone: str, per_source: int) -> list[str]:
    """Heterodox re-entry pages: two traditions x two sources x two records."""
    oa_client = OpenAlexClient(None)
    ax_client = ArxivClient(None)
    ids = []
    for t_index, tradition in enumerate(DEFAULT_TRADITIONS):
        query = FetchQuery(zone_text=f"{zone} {tradition}", per_source_limit=per_source)
        bank = _REENTRY_TITLE_BANKS[tradition]
        works = []
        for k in range(per_source):
            index = 901 + t_index * 10 + k
            work = _openalex_work(index, hub_refs=False)
            work["title"] = work["display_name"] = bank[k % len(bank)]
            work["primary_location"] = {"source": None}
            works.append(work)
            ids.append(f"open-alex:W{index:04d}")
        write_api_fixture(
            api_dir, SourceKind.OPEN_ALEX.value,
            oa_client._page_url(query, 1, per_source), _openalex_page(works),
        )
        entries = []
        arxiv_titles = [
            f"Counter mapping {tradition} in energy research",
            f"Methodologies of {tradition} for infrastructure studies",
        ]
        for k in range(per_source):
            native = f"2402.{t_index * 10 + k + 1:05d}"
            entries.append(
                _arxiv_entry(
                    native,
                    arxiv_titles[k % len(arxiv_titles)],
                    _abstract_words(40 + t_index * 10 + k),
                    2024,
                )
            )
            ids.append(f"arxiv:{native}")
        write_api_fixture(
            api_dir, SourceKind.ARXIV.value,
            ax_client._page_url(query, 0, per_source), _arxiv_feed(entries),
        )
    return ids


def _plant_layout(ids: list[str]) -> tuple[list[list[float]], list[list[float]], list[int]]:
    """16-d hash vectors plus a three-blob 2-D layout with planted labels."""
    vectors, points, labels = [], [], []
    centers = {
        SourceKind.OPEN_ALEX.value: (0.0, 0.0, 0),
        SourceKind.ARXIV.value: (12.0, 0.0, 1),
        SourceKind.HETERODOX_REENTRY.value: (6.0, 9.0, 2),
    }
    for pid in ids:
        seed = _h(pid)
        vectors.append([((seed >> k) % 997) / 997.0 for k in range(16)])
        prefix = pid.split(":", 1)[0]
        if prefix == "arxiv" and pid.startswith("arxiv:2402."):
            prefix = SourceKind.HETERODOX_REENTRY.value
        elif prefix == "open-alex" and int(pid.split("W")[-1]) >= 900:
            prefix = SourceKind.HETERODOX_REENTRY.value
        cx, cy, label = centers[prefix]
        jitter_x = ((seed % 200) / 200.0 - 0.5) * 1.6
        jitter_y = (((seed >> 8) % 200) / 200.0 - 0.5) * 1.6
        points.append([cx + jitter_x, cy + jitter_y])
        labels.append(label)
    return vectors, points, labels


class ScriptedLLM:
    """Pure function from prompt to payload; the source the recorder captures."""

    def respond(self, call: AgentCall) -> dict:
        prompt = call.prompt
        for suffix in (CORRECTIVE_SUFFIX, TITLE_RETRY_SUFFIX):
            if prompt.endswith(suffix):
                prompt = prompt[: -len(suffix)]
        if prompt.startswith("You are the epistemology agent"):
            return LENS_PAYLOAD
        if prompt.startswith("Lens reading request"):
            return self._reading(prompt)
        if prompt.startswith("Relation classification"):
            return self._edge(prompt)
        if prompt.startswith("Assemblage synthesis"):
            return self._assemblage(call.prompt)
        raise ValueError(f"scripted provider cannot answer prompt: {prompt[:60]!r}")

    def _reading(self, prompt: str) -> dict:
        lens = re.search(r"^lens: (.+)$", prompt, re.M).group(1).strip()
        paper = re.search(r"^paper: (.+)$", prompt, re.M).group(1).strip()
        return {
            "tensions": list(TENSIONS.get((lens, paper), [])),
            "relevance": _unit_interval(f"relevance|{lens}|{paper}", 0.1, 0.9),
            "confidence": _unit_interval(f"confidence|{lens}|{paper}"),
        }

    def _edge(self, prompt: str) -> dict:
        a = re.search(r"^from: (\S+) \|", prompt, re.M).group(1)
        b = re.search(r"^to: (\S+) \|", prompt, re.M).group(1)
        roll = _h(f"edge|{a}|{b}") % 10
        if roll < 5:
            cls = "constructive"
            subtype = ("extends", "builds-on", "borrows-method")[roll % 3]
        elif roll < 8:
            cls = "critical"
            subtype = ("contradicts", "problematizes", "challenges")[roll % 3]
        else:
            cls, subtype = "rhizomatic", "paradigm-rupture"
        return {
            "edge_class": cls,
            "subtype": subtype,
            "justification": f"Scripted: {a} {subtype} {b}.",
            "confidence": _unit_interval(f"edgeconf|{a}|{b}"),
        }

    def _assemblage(self, full_prompt: str) -> dict:
        retry = full_prompt.endswith(TITLE_RETRY_SUFFIX)
        title = "Becoming otherwise"
        for marker, planned in ANOMALY_TITLE_RULES:
            if marker in full_prompt:
                title = planned
                break
        if retry and not re.match(r"^[A-Za-z]+ing\b", title):
            # Deliberately stay non-conforming so the fallback prefix fires.
            title = title + " revisited"
        return {
            "title": title,
            "narrative": (
                "The corpus is assembling itself around this tension, papers "
                "are drifting toward one another, and a shared problem space "
                "is emerging across the lenses."
            ),
            "confidence": 0.8,
        }


class RecordingProvider:
    """Answers from the script while writing replayable fixture files."""

    def __init__(self, scripted: ScriptedLLM, fixture_dir: str | Path):
        self.scripted = scripted
        self.fixture_dir = Path(fixture_dir)
        self._replay = FixtureProvider(self.fixture_dir)

    async def complete(self, call: AgentCall) -> tuple[dict, TokenUsage]:
        payload = self.scripted.respond(call)
        write_llm_fixture(self.fixture_dir, call.agent_name, call.prompt, payload)
        # Serve the recorded bytes so recording and replay are identical.
        return await self._replay.complete(call)


def demo_config(root: Path, *, per_source_limit: int = 25) -> RunConfig:
    return RunConfig(
        zone=DEMO_ZONE,
        per_source_limit=per_source_limit,
        provider=ProviderConfig(kind="fixture", fixture_path=str(root / "llm")),
        api_fixture_dir=str(root / "api"),
        abs_rank_csv=str(root / "abs_ranks.csv"),
        injected_matrix_path=str(root / "injected_matrix.json"),
        reentry_per_source_limit=2,
        seed=7,
    )


def build_demo_scenario(
    root: str | Path,
    *,
    hub_refs: bool = True,
    with_llm_fixtures: bool = True,
) -> DemoScenario:
    """Write every fixture a fully offline run needs under ``root``.

    hub_refs=True plants a citation hub so centralization trips in phase 4;
    hub_refs=False leaves the shadow empty so the first trigger (if any)
    comes from the phase-5 relation graph.
    """
    root = Path(root)
    (root / "api").mkdir(parents=True, exist_ok=True)
    (root / "llm").mkdir(parents=True, exist_ok=True)

    main_ids = _write_main_fixtures(root / "api", DEMO_ZONE, 25, hub_refs)
    reentry_ids = _write_reentry_fixtures(root / "api", DEMO_ZONE, 2)

    sample = resources.files("rhizome.data").joinpath("abs_ranks_sample.csv").read_text()
    (root / "abs_ranks.csv").write_text(sample, encoding="utf-8")

    all_ids = main_ids + reentry_ids
    vectors, points, labels = _plant_layout(all_ids)
    write_injected_matrix(
        root / "injected_matrix.json", all_ids, vectors, points, labels, model_name="planted-demo"
    )

    config = demo_config(root)
    if with_llm_fixtures:
        _record_llm_fixtures(config)
    return DemoScenario(
        root=root,
        config=config,
        main_corpus_size=len(main_ids),
        reentry_batch_size=len(reentry_ids),
    )


def _record_llm_fixtures(config: RunConfig) -> None:
    """One recording pass of the whole pipeline against the scripted agent."""
    from .orchestrator.runner import PipelineRun

    async def record() -> None:
        run = PipelineRun(config)
        run.runtime.provider = RecordingProvider(ScriptedLLM(), config.provider.fixture_path)
        document = await run.execute()
        if not document:
            raise RuntimeError(f"fixture recording run failed: {run.error}")

    asyncio.run(record())
