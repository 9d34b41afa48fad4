"""The seven-phase state machine that conducts a full analysis run."""

from __future__ import annotations

import asyncio
import logging
import uuid
from enum import Enum

from ..agents import AgentRuntime, SchemaRegistry, make_provider
from ..integrity import (
    assign_ranks,
    build_citation_shadow,
    dedupe,
    load_rank_table,
)
from ..lenses import (
    read_corpus,
    read_corpus_all,
    generate_lenses,
    lens_agent_name,
    register_lens_schemas,
)
from ..records import FetchQuery, SourceKind
from ..resonance import centralization_risk, detect_anomalies, heterodox_reentry
from ..sidecar_client import SidecarClient, TopographySource
from ..synthesis import (
    KnowledgeGraph,
    build_assemblages,
    build_cartography,
    candidate_pairs,
    classify_pairs,
    register_synthesis_schemas,
    validate_graph,
)
from ..topography import TopographyUnavailable, build_topography
from ..ingestion import IngestService
from .config import RunConfig
from .events import EventKind, EventLog, PhaseId

log = logging.getLogger(__name__)


class RunStatus(str, Enum):
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


class ConfigRejected(Exception):
    def __init__(self, problems: list[tuple[str, str]]):
        super().__init__("; ".join(f"{f}: {r}" for f, r in problems))
        self.problems = problems


def _schema_registry() -> SchemaRegistry:
    registry = SchemaRegistry()
    register_lens_schemas(registry)
    register_synthesis_schemas(registry)
    return registry


class PipelineRun:
    """One isolated run: owns its corpus, runtime, graph, and event log."""

    def __init__(self, config: RunConfig, run_id: str | None = None,
                 ingest_service: IngestService | None = None):
        problems = config.validate()
        if problems:
            raise ConfigRejected(problems)
        self.config = config
        self.run_id = run_id or f"run-{uuid.uuid4().hex[:12]}"
        self.log = EventLog(self.run_id)
        self.status = RunStatus.PENDING
        self.current_phase: PhaseId | None = None
        self.error: str | None = None

        self.runtime = AgentRuntime(
            make_provider(config.provider), _schema_registry(), config.max_in_flight
        )
        if ingest_service is not None:
            self.ingest_service = ingest_service
        elif config.api_fixture_dir:
            self.ingest_service = IngestService.with_fixtures(config.api_fixture_dir, config.mailto)
        else:
            self.ingest_service = IngestService.live(config.mailto)

        self.corpus = []
        self.duplicate_clusters = []
        self.lenses = []
        self.readings = []  # flat, every (lens, paper) reading
        self.shadow = None
        self.anomalies = []
        self.rupture_events = []
        self.graph = KnowledgeGraph()
        self.assemblages = []
        self.cartography: dict | None = None
        self.topography = None
        self.topography_status = "pending"
        self._reentries_done = 0

    # --- event helpers -----------------------------------------------------

    async def _emit(self, kind: EventKind, payload: dict, phase: PhaseId | None = None) -> None:
        target = phase if phase is not None else self.current_phase
        await self.log.emit(kind, target.value if target else None, payload)

    async def _phase_started(self, phase: PhaseId) -> None:
        self.current_phase = phase
        await self._emit(EventKind.PHASE_STARTED, {"phase": phase.value})

    async def _phase_completed(self, phase: PhaseId, payload: dict | None = None) -> None:
        await self._emit(EventKind.PHASE_COMPLETED, {"phase": phase.value, **(payload or {})})

    # --- phases --------------------------------------------------------------

    async def execute(self) -> dict:
        """Run P1..P7; returns the final cartography document."""
        self.status = RunStatus.RUNNING
        await self._emit(EventKind.RUN_STARTED, {"zone": self.config.zone, "seed": self.config.seed})
        try:
            await self._phase_1_lenses()
            await self._phase_2_ingest()
            await self._phase_3_readings()
            await self._phase_4_resonance()
            await self._phase_5_synthesis()
            await self._phase_6_cartography()
        except Exception as exc:
            self.status = RunStatus.FAILED
            self.error = str(exc)
            phase = self.current_phase.value if self.current_phase else None
            log.exception("run %s failed in %s", self.run_id, phase)
            await self._emit(EventKind.RUN_FAILED, {"phase": phase, "error": str(exc)})
            return {}
        # P7 degrades gracefully: a sidecar outage must not fail the run.
        await self._phase_7_topography()
        self.status = RunStatus.COMPLETED
        await self._emit(
            EventKind.RUN_COMPLETED,
            {"topography_status": self.topography_status, "corpus_size": len(self.corpus)},
        )
        return self.cartography

    async def _phase_1_lenses(self) -> None:
        await self._phase_started(PhaseId.P1)
        self.lenses = await generate_lenses(
            self.runtime,
            self.config.zone,
            self.config.lens_count_range,
            self.config.lens_jaccard_max,
        )
        await self._emit(
            EventKind.LENSES_GENERATED,
            {"lenses": [l.to_dict() for l in self.lenses]},
        )
        await self._phase_completed(PhaseId.P1, {"lens_count": len(self.lenses)})

    async def _phase_2_ingest(self) -> None:
        await self._phase_started(PhaseId.P2)
        query = FetchQuery(
            zone_text=self.config.zone,
            per_source_limit=self.config.per_source_limit,
            year_range=self.config.year_range,
            mailto=self.config.mailto,
        )
        records, report = await self.ingest_service.ingest(query)
        for source, stats in sorted(report.sources.items()):
            await self._emit(
                EventKind.PAPERS_FETCHED,
                {"source": source, **stats.to_dict()},
            )
        self.corpus, self.duplicate_clusters = dedupe(records, self.config.dice_threshold)
        await self._emit(
            EventKind.DUPLICATES_REMOVED,
            {
                "before": len(records),
                "after": len(self.corpus),
                "clusters": [c.to_dict() for c in self.duplicate_clusters],
            },
        )
        table = load_rank_table(self.config.abs_rank_csv) if self.config.abs_rank_csv else {}
        self.corpus = assign_ranks(self.corpus, table)
        self.shadow = build_citation_shadow(self.corpus, self.config.anchor_count)
        await self._phase_completed(
            PhaseId.P2,
            {
                "corpus_size": len(self.corpus),
                "anchors": len(self.shadow.anchors),
                "shadow_edges": len(self.shadow.shadow_edges),
            },
        )

    async def _phase_3_readings(self) -> None:
        await self._phase_started(PhaseId.P3)
        by_lens = await read_corpus_all(self.runtime, self.lenses, self.corpus, self.config.top_m)
        for lens in self.lenses:
            batch = by_lens[lens.name]
            self.readings.extend(batch)
            await self._emit(
                EventKind.LENS_READING_DONE,
                {
                    "lens": lens.name,
                    "readings": len(batch),
                    "with_tensions": sum(1 for r in batch if r.tensions),
                },
            )
        await self._phase_completed(PhaseId.P3, {"readings": len(self.readings)})

    async def _detect_and_emit_anomalies(self, reentry: int | None = None) -> None:
        known = {a.id for a in self.anomalies}
        self.anomalies = detect_anomalies(self.readings)
        for anomaly in self.anomalies:
            if anomaly.id in known:
                continue
            payload = anomaly.to_dict()
            if reentry is not None:
                payload["reentry"] = reentry
            await self._emit(EventKind.ANOMALY_DETECTED, payload)

    async def _rupture(self, report, phase: PhaseId) -> bool:
        """One re-entry for one trigger; returns True when papers changed."""
        index = self._reentries_done + 1
        await self._emit(
            EventKind.RUPTURE_TRIGGERED,
            {"report": report.to_dict(), "reentry_index": index},
            phase=phase,
        )
        corpus, injected, event = await heterodox_reentry(
            self.config.zone,
            list(self.config.traditions),
            self.corpus,
            self.ingest_service,
            report,
            reentry_index=index,
            max_reentries=self.config.max_reentries,
            per_source_limit=self.config.reentry_per_source_limit,
            dice_threshold=self.config.dice_threshold,
            mailto=self.config.mailto,
        )
        self._reentries_done = index
        self.corpus = corpus
        self.rupture_events.append(event)
        await self._emit(
            EventKind.PAPERS_FETCHED,
            {
                "source": SourceKind.HETERODOX_REENTRY.value,
                "received": len(injected),
                "reentry": index,
            },
            phase=phase,
        )
        if injected:
            self.shadow = build_citation_shadow(self.corpus, self.config.anchor_count)
            for lens in self.lenses:
                batch = await read_corpus(self.runtime, lens, injected, self.config.top_m)
                self.readings.extend(batch)
                await self._emit(
                    EventKind.LENS_READING_DONE,
                    {"lens": lens.name, "readings": len(batch), "reentry": index},
                    phase=phase,
                )
            await self._detect_and_emit_anomalies(reentry=index)
        await self._emit(
            EventKind.REENTRY_COMPLETED,
            {**event.to_dict(), "corpus_size": len(self.corpus)},
            phase=phase,
        )
        return bool(injected)

    async def _phase_4_resonance(self) -> None:
        await self._phase_started(PhaseId.P4)
        await self._detect_and_emit_anomalies()
        while True:
            report = centralization_risk(
                [p.id for p in self.corpus],
                self.shadow.shadow_edges,
                self.config.centralization_threshold,
                self.config.k_fraction,
            )
            if not report.triggered or self._reentries_done >= self.config.max_reentries:
                break
            await self._rupture(report, PhaseId.P4)
        await self._phase_completed(
            PhaseId.P4,
            {"anomalies": len(self.anomalies), "reentries": self._reentries_done},
        )

    async def _phase_5_synthesis(self) -> None:
        await self._phase_started(PhaseId.P5)
        self.graph = KnowledgeGraph(
            nodes={p.id: p.heterodox_flag for p in self.corpus}
        )
        done: set[frozenset] = set()
        pending = candidate_pairs(
            self.corpus, self.shadow, self.anomalies, self.config.candidate_pair_cap
        )
        while pending:
            batch, pending = (
                pending[: self.config.edge_batch_size],
                pending[self.config.edge_batch_size :],
            )
            done.update(frozenset(p) for p in batch)
            edges, skipped = await classify_pairs(self.runtime, batch, self.corpus, self.readings)
            for edge in edges:
                if self.graph.add_edge(edge):
                    await self._emit(EventKind.EDGE_CLASSIFIED, edge.to_dict())
            for pair in skipped:
                log.warning("pair %s skipped after agent failure", pair)
            report = centralization_risk(
                sorted(self.graph.nodes),
                self.graph.endpoint_pairs(),
                self.config.centralization_threshold,
                self.config.k_fraction,
            )
            if report.triggered and self._reentries_done < self.config.max_reentries:
                grew = await self._rupture(report, PhaseId.P5)
                for p in self.corpus:
                    self.graph.nodes.setdefault(p.id, p.heterodox_flag)
                if grew:
                    refreshed = candidate_pairs(
                        self.corpus, self.shadow, self.anomalies, self.config.candidate_pair_cap
                    )
                    pend_keys = {frozenset(p) for p in pending}
                    pending = pending + [
                        p for p in refreshed
                        if frozenset(p) not in done and frozenset(p) not in pend_keys
                    ]
        validate_graph(self.graph)
        self.assemblages = await build_assemblages(self.runtime, self.anomalies, self.corpus)
        for assemblage in self.assemblages:
            await self._emit(EventKind.ASSEMBLAGE_BUILT, assemblage.to_dict())
        await self._phase_completed(
            PhaseId.P5,
            {"edges": len(self.graph.edges), "assemblages": len(self.assemblages)},
        )

    def _build_document(self) -> dict:
        topo = self.topography.to_dict() if self.topography is not None else None
        return build_cartography(
            zone=self.config.zone,
            lenses=self.lenses,
            corpus=self.corpus,
            anomalies=self.anomalies,
            rupture_events=self.rupture_events,
            graph=self.graph,
            assemblages=self.assemblages,
            readings=self.readings,
            call_records=self.runtime.records,
            agent_roster=self.config.agent_roster([lens_agent_name(l).split(":", 1)[1] for l in self.lenses]),
            topography=topo,
            topography_status=self.topography_status,
            config=self.config.to_dict(),
            run_id=self.run_id,
            seed=self.config.seed,
        )

    async def _phase_6_cartography(self) -> None:
        await self._phase_started(PhaseId.P6)
        self.cartography = self._build_document()
        await self._emit(
            EventKind.CARTOGRAPHY_READY,
            {
                "schema_version": self.cartography["schema_version"],
                "topography_status": self.topography_status,
            },
        )
        await self._phase_completed(PhaseId.P6, {})

    async def _phase_7_topography(self) -> None:
        await self._phase_started(PhaseId.P7)
        try:
            source = self._topography_source()
            matrix = await source.embeddings_for(self.corpus)
            points, labels = await source.layout(
                matrix, self.config.seed, self.config.min_cluster_size
            )
            self.topography = build_topography(
                self.corpus,
                matrix,
                points,
                labels,
                gap_ratio_threshold=self.config.gap_ratio_threshold,
                vocab_jaccard_min=self.config.vocab_jaccard_min,
                top_k=self.config.top_terms_k,
            )
            self.topography_status = "available"
            await self._emit(
                EventKind.TOPOGRAPHY_READY,
                {
                    "clusters": len(self.topography.clusters),
                    "voids": len(self.topography.voids),
                    "isolations": len(self.topography.isolations),
                },
            )
        except TopographyUnavailable as exc:
            self.topography_status = f"unavailable: {exc}"
            log.warning("topography unavailable for %s: %s", self.run_id, exc)
        self.cartography = self._build_document()
        await self._phase_completed(PhaseId.P7, {"topography_status": self.topography_status})

    def _topography_source(self) -> TopographySource:
        if self.config.injected_matrix_path is None and self.config.sidecar_url is None:
            raise TopographyUnavailable("no sidecar configured")
        sidecar = SidecarClient(self.config.sidecar_url) if self.config.sidecar_url else None
        try:
            return TopographySource(
                sidecar=sidecar,
                injected_path=self.config.injected_matrix_path,
                model=self.config.embed_model,
            )
        except (OSError, ValueError) as exc:
            raise TopographyUnavailable(f"injected matrix unreadable: {exc}") from exc

    def status_view(self) -> dict:
        return {
            "run_id": self.run_id,
            "status": self.status.value,
            "phase": self.current_phase.value if self.current_phase else None,
            "last_sequence": self.log.last_sequence,
            "error": self.error,
            "topography_status": self.topography_status,
        }


class RunRegistry:
    """In-memory run store; one state machine per run, no sharing."""

    def __init__(self):
        self.runs: dict[str, PipelineRun] = {}
        self._tasks: dict[str, asyncio.Task] = {}

    def create(self, config: RunConfig, ingest_service=None) -> PipelineRun:
        run = PipelineRun(config, ingest_service=ingest_service)
        self.runs[run.run_id] = run
        return run

    def start(self, config: RunConfig, ingest_service=None) -> PipelineRun:
        """Register and launch; events begin flowing immediately."""
        run = self.create(config, ingest_service)
        self._tasks[run.run_id] = asyncio.create_task(run.execute())
        return run

    def get(self, run_id: str) -> PipelineRun | None:
        return self.runs.get(run_id)

    async def wait(self, run_id: str) -> None:
        task = self._tasks.get(run_id)
        if task is not None:
            await task
