"""OpenAlex works client: search, pagination, inverted-index abstracts."""

from __future__ import annotations

import asyncio
import json
import logging
from urllib.parse import urlencode

from ..records import FetchQuery, SourceKind, SourceRecord, SourceFetchStats
from .transport import TransportError

log = logging.getLogger(__name__)

BASE_URL = "https://api.openalex.org/works"
MAX_PER_PAGE = 200


def reconstruct_abstract(inverted_index: dict | None) -> str | None:
    """Rebuild abstract text from OpenAlex's positional inverted index."""
    if not inverted_index:
        return None
    slots: dict[int, str] = {}
    for word, positions in inverted_index.items():
        for pos in positions:
            slots[pos] = word
    return " ".join(slots[pos] for pos in sorted(slots)) or None


def _native_id(work: dict) -> str | None:
    raw = work.get("id") or ""
    native = raw.rsplit("/", 1)[-1].strip()
    return native or None


class OpenAlexClient:
    source = SourceKind.OPEN_ALEX

    def __init__(self, transport, mailto: str | None = None, retries: int = 2, backoff: float = 0.5):
        self.transport = transport
        self.mailto = mailto
        self.retries = retries
        self.backoff = backoff

    def _page_url(self, query: FetchQuery, page: int, per_page: int) -> str:
        params: list[tuple[str, str]] = [
            ("search", query.zone_text),
            ("per-page", str(per_page)),
            ("page", str(page)),
        ]
        if query.year_range is not None:
            lo, hi = query.year_range
            params.append(("filter", f"publication_year:{lo}-{hi}"))
        mailto = query.mailto or self.mailto
        if mailto:
            params.append(("mailto", mailto))
        return f"{BASE_URL}?{urlencode(params)}"

    async def _get(self, url: str) -> str:
        for attempt in range(self.retries + 1):
            try:
                return await self.transport.get(url)
            except TransportError as exc:
                if not exc.retryable or attempt == self.retries:
                    raise
                await asyncio.sleep(self.backoff * (2**attempt))
        raise TransportError("unreachable", self.source.value)

    async def fetch(self, query: FetchQuery) -> tuple[list[SourceRecord], SourceFetchStats]:
        stats = SourceFetchStats(requested=query.per_source_limit)
        records: list[SourceRecord] = []
        if query.per_source_limit == 0:
            return records, stats
        # Page size must stay constant across pages or the page offsets shift;
        # the final page is truncated client-side instead.
        per_page = min(MAX_PER_PAGE, query.per_source_limit)
        page = 1
        while len(records) < query.per_source_limit:
            body = await self._get(self._page_url(query, page, per_page))
            try:
                payload = json.loads(body)
                works = payload.get("results", [])
            except (json.JSONDecodeError, AttributeError) as exc:
                raise TransportError(f"malformed page payload: {exc}", self.source.value, retryable=False)
            if not works:
                break
            for work in works:
                if len(records) >= query.per_source_limit:
                    break
                native = _native_id(work)
                if native is None:
                    stats.failed += 1
                    stats.failures.append("work without id skipped")
                    continue
                stats.received += 1
                records.append(SourceRecord(self.source, native, work))
            if len(works) < per_page:
                break
            page += 1
        return records, stats
