"""Core corpus record types shared by every pipeline stage."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum

# Hard ceiling on per-source fetch size; a configuration default, not a
# property of the upstream APIs.
PER_SOURCE_HARD_CAP = 500

_WS = re.compile(r"\s+")


class SourceKind(str, Enum):
    OPEN_ALEX = "open-alex"
    ARXIV = "arxiv"
    HETERODOX_REENTRY = "heterodox-reentry"


@dataclass(frozen=True)
class FetchQuery:
    """A corpus fetch request against one or both scholarly sources."""

    zone_text: str
    per_source_limit: int = 25
    year_range: tuple[int, int] | None = None
    mailto: str | None = None

    def validate(self, hard_cap: int = PER_SOURCE_HARD_CAP) -> list[str]:
        problems = []
        if not self.zone_text.strip():
            problems.append("zone_text must be non-empty")
        if self.per_source_limit < 0:
            problems.append("per_source_limit must be >= 0")
        if self.per_source_limit > hard_cap:
            problems.append(f"per_source_limit exceeds hard cap {hard_cap}")
        if self.year_range is not None and self.year_range[0] > self.year_range[1]:
            problems.append("year_range must be (low, high) inclusive")
        return problems


@dataclass(frozen=True)
class SourceRecord:
    """Raw per-source payload, prior to normalization."""

    source: SourceKind
    native_id: str
    payload: dict


@dataclass
class PaperRecord:
    """One scholarly work: metadata plus abstract, no full text."""

    id: str
    source: SourceKind
    title: str
    doi: str | None = None
    abstract_text: str | None = None
    authors: list[str] = field(default_factory=list)
    venue: str | None = None
    year: int | None = None
    cited_by_count: int = 0
    referenced_ids: list[str] = field(default_factory=list)
    abs_rank: str | None = None
    heterodox_flag: bool = False
    rigor_weight: float = 1.0

    def text(self) -> str:
        """Title plus abstract, the unit of all lexical analysis."""
        if self.abstract_text:
            return f"{self.title} {self.abstract_text}"
        return self.title

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "source": self.source.value,
            "title": self.title,
            "doi": self.doi,
            "abstract_text": self.abstract_text,
            "authors": list(self.authors),
            "venue": self.venue,
            "year": self.year,
            "cited_by_count": self.cited_by_count,
            "referenced_ids": list(self.referenced_ids),
            "abs_rank": self.abs_rank,
            "heterodox_flag": self.heterodox_flag,
            "rigor_weight": self.rigor_weight,
        }


@dataclass
class SourceFetchStats:
    requested: int = 0
    received: int = 0
    failed: int = 0
    latency_ms: float = 0.0
    failures: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "requested": self.requested,
            "received": self.received,
            "failed": self.failed,
            "latency_ms": self.latency_ms,
            "failures": list(self.failures),
        }


@dataclass
class FetchReport:
    """Per-source accounting for one ingest pass."""

    sources: dict[str, SourceFetchStats] = field(default_factory=dict)

    def stats(self, kind: SourceKind) -> SourceFetchStats:
        return self.sources.setdefault(kind.value, SourceFetchStats())

    def to_dict(self) -> dict:
        return {name: s.to_dict() for name, s in sorted(self.sources.items())}


def collapse_whitespace(text: str) -> str:
    return _WS.sub(" ", text).strip()


def as_reentry(record: PaperRecord, unranked_weight: float = 0.5) -> PaperRecord:
    """Retag a fetched record as heterodox re-entry literature.

    Re-entry works are heterodox by provenance, so the ranking pass is
    bypassed for them.
    """
    return replace(
        record,
        source=SourceKind.HETERODOX_REENTRY,
        heterodox_flag=True,
        abs_rank=None,
        rigor_weight=unranked_weight,
    )
