"""Dual-source concurrent ingestion into normalized paper records."""

from __future__ import annotations

import asyncio
import logging
import time

from ..records import (
    FetchQuery,
    FetchReport,
    PaperRecord,
    SourceKind,
    SourceRecord,
    collapse_whitespace,
)
from .arxiv import ArxivClient
from .openalex import OpenAlexClient, reconstruct_abstract
from .transport import FixtureTransport, HttpTransport

log = logging.getLogger(__name__)


class RecordRejected(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def normalize_record(raw: SourceRecord) -> PaperRecord:
    """Map a raw source payload onto the uniform record shape.

    Raises RecordRejected("untitled") when no usable title survives
    normalization.
    """
    p = raw.payload
    if raw.source is SourceKind.OPEN_ALEX:
        title = collapse_whitespace(p.get("title") or p.get("display_name") or "")
        if not title:
            raise RecordRejected("untitled")
        abstract = p.get("abstract_text")
        if abstract is None:
            abstract = reconstruct_abstract(p.get("abstract_inverted_index"))
        venue = None
        primary = p.get("primary_location") or {}
        if isinstance(primary, dict):
            src = primary.get("source") or {}
            if isinstance(src, dict):
                venue = src.get("display_name")
        authors = []
        for authorship in p.get("authorships") or []:
            name = ((authorship or {}).get("author") or {}).get("display_name")
            if name:
                authors.append(name)
        refs = [r.rsplit("/", 1)[-1] for r in p.get("referenced_works") or []]
        return PaperRecord(
            id=f"{raw.source.value}:{raw.native_id}",
            source=raw.source,
            title=title,
            doi=p.get("doi"),
            abstract_text=abstract,
            authors=authors,
            venue=venue,
            year=p.get("publication_year"),
            cited_by_count=max(0, int(p.get("cited_by_count") or 0)),
            referenced_ids=refs,
        )
    if raw.source is SourceKind.ARXIV:
        title = collapse_whitespace(p.get("title") or "")
        if not title:
            raise RecordRejected("untitled")
        summary = collapse_whitespace(p.get("summary") or "") or None
        return PaperRecord(
            id=f"{raw.source.value}:{raw.native_id}",
            source=raw.source,
            title=title,
            doi=p.get("doi"),
            abstract_text=summary,
            authors=[a for a in p.get("authors") or [] if a],
            venue=p.get("journal_ref"),
            year=p.get("year"),
            cited_by_count=0,
            referenced_ids=[],  # the arXiv feed carries no reference lists
        )
    raise RecordRejected(f"unknown source {raw.source}")


class IngestService:
    """Owns the two source clients; one instance may serve many queries."""

    def __init__(self, openalex: OpenAlexClient, arxiv: ArxivClient):
        self.openalex = openalex
        self.arxiv = arxiv

    @classmethod
    def with_fixtures(cls, fixture_dir, mailto: str | None = None) -> "IngestService":
        return cls(
            OpenAlexClient(FixtureTransport(fixture_dir, SourceKind.OPEN_ALEX.value), mailto),
            ArxivClient(FixtureTransport(fixture_dir, SourceKind.ARXIV.value)),
        )

    @classmethod
    def live(cls, mailto: str | None = None) -> "IngestService":
        return cls(
            OpenAlexClient(HttpTransport(SourceKind.OPEN_ALEX.value), mailto),
            ArxivClient(HttpTransport(SourceKind.ARXIV.value)),
        )

    async def _fetch_one(self, client, query: FetchQuery, report: FetchReport) -> list[PaperRecord]:
        stats = report.stats(client.source)
        stats.requested = query.per_source_limit
        started = time.perf_counter()
        try:
            raw_records, fetch_stats = await client.fetch(query)
        except Exception as exc:  # one source failing must not abort the run
            stats.latency_ms = (time.perf_counter() - started) * 1000.0
            stats.failed += 1
            stats.failures.append(str(exc))
            log.warning("source %s failed: %s", client.source.value, exc)
            return []
        stats.received = fetch_stats.received
        stats.failed += fetch_stats.failed
        stats.failures.extend(fetch_stats.failures)
        normalized = []
        for raw in raw_records:
            try:
                normalized.append(normalize_record(raw))
            except RecordRejected as exc:
                stats.failed += 1
                stats.failures.append(f"{raw.native_id}: {exc.reason}")
        stats.latency_ms = (time.perf_counter() - started) * 1000.0
        return normalized

    async def ingest(self, query: FetchQuery) -> tuple[list[PaperRecord], FetchReport]:
        """Fetch both sources concurrently; partial failure yields a partial
        corpus with the failure recorded, never an exception."""
        problems = query.validate()
        if problems:
            raise ValueError("; ".join(problems))
        report = FetchReport()
        results = await asyncio.gather(
            self._fetch_one(self.openalex, query, report),
            self._fetch_one(self.arxiv, query, report),
        )
        records = [r for batch in results for r in batch]
        records.sort(key=lambda r: (r.source.value, r.id))
        return records, report
