"""Cross-lens convergent anomalies, centralization risk, heterodox re-entry."""

from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass, field

from .integrity import merge_new_records
from .lenses import LensReading
from .records import FetchQuery, PaperRecord, as_reentry, collapse_whitespace

log = logging.getLogger(__name__)

DEFAULT_CENTRALIZATION_THRESHOLD = 0.40
DEFAULT_K_FRACTION = 0.05
DEFAULT_MAX_REENTRIES = 2

# The paper's two named heterodox traditions seed the default configuration.
DEFAULT_TRADITIONS = ("degrowth economics", "indigenous ontologies")

_TERMINAL_PUNCTUATION = ".,;:!?"


def canonical_tension(text: str) -> str:
    """Lowercase, collapse whitespace, strip terminal punctuation."""
    canon = collapse_whitespace(text.lower())
    return canon.rstrip(_TERMINAL_PUNCTUATION).strip()


@dataclass
class ConvergentAnomaly:
    id: str
    canonical_tension: str
    lens_names: list[str]
    paper_ids: list[str]
    intensity: float

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "canonical_tension": self.canonical_tension,
            "lens_names": list(self.lens_names),
            "paper_ids": list(self.paper_ids),
            "intensity": self.intensity,
        }


def detect_anomalies(readings: list[LensReading]) -> list[ConvergentAnomaly]:
    """Group canonicalized tensions; keep groups spanning >= 2 lenses.

    Intensity is lens count times the mean confidence of every contributing
    reading. Output sorted by intensity descending.
    """
    groups: dict[str, list[LensReading]] = {}
    for reading in readings:
        for tension in reading.tensions:
            canon = canonical_tension(tension)
            if canon:
                groups.setdefault(canon, []).append(reading)
    anomalies = []
    for canon, contributors in groups.items():
        lens_names = sorted({r.lens_name for r in contributors})
        if len(lens_names) < 2:
            continue
        mean_conf = sum(r.confidence for r in contributors) / len(contributors)
        anomalies.append(
            ConvergentAnomaly(
                id="anomaly-" + hashlib.sha1(canon.encode("utf-8")).hexdigest()[:10],
                canonical_tension=canon,
                lens_names=lens_names,
                paper_ids=sorted({r.paper_id for r in contributors}),
                intensity=len(lens_names) * mean_conf,
            )
        )
    anomalies.sort(key=lambda a: (-a.intensity, a.canonical_tension))
    return anomalies


@dataclass
class CentralizationReport:
    hub_ids: list[str]
    k: int
    incident_fraction: float
    threshold: float
    triggered: bool

    def to_dict(self) -> dict:
        return {
            "hub_ids": list(self.hub_ids),
            "k": self.k,
            "incident_fraction": self.incident_fraction,
            "threshold": self.threshold,
            "triggered": self.triggered,
        }


def centralization_risk(
    node_ids: list[str],
    edges: list[tuple[str, str]],
    threshold: float = DEFAULT_CENTRALIZATION_THRESHOLD,
    k_fraction: float = DEFAULT_K_FRACTION,
) -> CentralizationReport:
    """Fraction of edges incident to the top ceil(k_fraction*|V|) hubs.

    Strict comparison: a fraction exactly equal to the threshold does not
    trigger.
    """
    k = max(1, math.ceil(k_fraction * len(node_ids)))
    if not edges:
        return CentralizationReport(hub_ids=sorted(node_ids)[:k] if node_ids else [], k=k,
                                    incident_fraction=0.0, threshold=threshold, triggered=False)
    degree = {node: 0 for node in node_ids}
    for u, v in edges:
        degree[u] = degree.get(u, 0) + 1
        degree[v] = degree.get(v, 0) + 1
    hubs = sorted(degree, key=lambda n: (-degree[n], n))[:k]
    hub_set = set(hubs)
    incident = sum(1 for u, v in edges if u in hub_set or v in hub_set)
    fraction = incident / len(edges)
    return CentralizationReport(
        hub_ids=hubs,
        k=k,
        incident_fraction=fraction,
        threshold=threshold,
        triggered=fraction > threshold,
    )


@dataclass
class RuptureEvent:
    trigger_report: CentralizationReport
    traditions_queried: list[str]
    injected_paper_ids: list[str]
    reentry_index: int
    failures: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "trigger_report": self.trigger_report.to_dict(),
            "traditions_queried": list(self.traditions_queried),
            "injected_paper_ids": list(self.injected_paper_ids),
            "reentry_index": self.reentry_index,
            "failures": list(self.failures),
        }


class ReentryExhausted(Exception):
    """Re-entry refused: the max_reentries budget is spent."""


async def heterodox_reentry(
    zone: str,
    traditions: list[str],
    corpus: list[PaperRecord],
    ingest_service,
    trigger_report: CentralizationReport,
    *,
    reentry_index: int,
    max_reentries: int = DEFAULT_MAX_REENTRIES,
    per_source_limit: int = 5,
    dice_threshold: float = 0.85,
    unranked_weight: float = 0.5,
    mailto: str | None = None,
) -> tuple[list[PaperRecord], list[PaperRecord], RuptureEvent]:
    """Forced ingestion from heterodox traditions after a trigger.

    Queries both sources for zone + tradition, tags results as heterodox
    re-entry, and folds them into the corpus without touching existing
    records. Returns (corpus, injected, event); all-sources failure yields an
    attempted-but-empty event, never an exception.
    """
    if reentry_index > max_reentries:
        raise ReentryExhausted(f"re-entry {reentry_index} exceeds budget {max_reentries}")
    if not trigger_report.triggered:
        raise ValueError("re-entry requires a triggered centralization report")
    fetched: list[PaperRecord] = []
    failures: list[str] = []
    for tradition in traditions:
        query = FetchQuery(
            zone_text=f"{zone} {tradition}",
            per_source_limit=per_source_limit,
            mailto=mailto,
        )
        records, report = await ingest_service.ingest(query)
        for stats in report.sources.values():
            failures.extend(stats.failures)
        fetched.extend(as_reentry(r, unranked_weight) for r in records)
    if not fetched:
        log.warning("rupture re-entry %d fetched nothing: %s", reentry_index, failures)
        event = RuptureEvent(trigger_report, list(traditions), [], reentry_index, failures)
        return corpus, [], event
    merged, injected, _ = merge_new_records(corpus, fetched, dice_threshold)
    event = RuptureEvent(
        trigger_report=trigger_report,
        traditions_queried=list(traditions),
        injected_paper_ids=[r.id for r in injected],
        reentry_index=reentry_index,
        failures=failures,
    )
    return merged, injected, event
