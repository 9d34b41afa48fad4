"""arXiv query-API client over the Atom XML feed."""

from __future__ import annotations

import asyncio
import logging
import re
import time
import xml.etree.ElementTree as ET
from urllib.parse import urlencode

from ..records import FetchQuery, SourceKind, SourceRecord, SourceFetchStats
from .transport import TransportError

log = logging.getLogger(__name__)

BASE_URL = "http://export.arxiv.org/api/query"
MAX_PER_REQUEST = 100
REQUEST_SPACING_S = 3.0  # arXiv asks for >= 3 s between requests

_NS = {
    "atom": "http://www.w3.org/2005/Atom",
    "arxiv": "http://arxiv.org/schemas/atom",
}
_VERSION = re.compile(r"v\d+$")


def native_arxiv_id(entry_id: str) -> str | None:
    """``http://arxiv.org/abs/2101.00001v2`` -> ``2101.00001``.

    Bare ids (as they appear in fixtures) pass through unchanged apart from
    the version suffix.
    """
    tail = entry_id.rsplit("/abs/", 1)[-1].strip()
    if not tail:
        return None
    return _VERSION.sub("", tail)


def parse_feed(body: str) -> list[SourceRecord]:
    root = ET.fromstring(body)
    records = []
    for entry in root.findall("atom:entry", _NS):
        raw_id = entry.findtext("atom:id", default="", namespaces=_NS)
        native = native_arxiv_id(raw_id)
        if not native:
            continue
        published = entry.findtext("atom:published", default="", namespaces=_NS)
        year = None
        if len(published) >= 4 and published[:4].isdigit():
            year = int(published[:4])
        payload = {
            "id": raw_id,
            "title": entry.findtext("atom:title", default="", namespaces=_NS),
            "summary": entry.findtext("atom:summary", default="", namespaces=_NS),
            "authors": [
                a.findtext("atom:name", default="", namespaces=_NS)
                for a in entry.findall("atom:author", _NS)
            ],
            "year": year,
            "journal_ref": entry.findtext("arxiv:journal_ref", default=None, namespaces=_NS),
            "doi": entry.findtext("arxiv:doi", default=None, namespaces=_NS),
        }
        records.append(SourceRecord(SourceKind.ARXIV, native, payload))
    return records


class ArxivClient:
    source = SourceKind.ARXIV

    def __init__(self, transport, retries: int = 2, backoff: float = 0.5):
        self.transport = transport
        self.retries = retries
        self.backoff = backoff
        self._last_request = 0.0

    def _page_url(self, query: FetchQuery, start: int, count: int) -> str:
        params = [
            ("search_query", f"all:{query.zone_text}"),
            ("start", str(start)),
            ("max_results", str(count)),
        ]
        return f"{BASE_URL}?{urlencode(params)}"

    async def _pace(self) -> None:
        if not getattr(self.transport, "live", False):
            return
        elapsed = time.monotonic() - self._last_request
        if elapsed < REQUEST_SPACING_S:
            await asyncio.sleep(REQUEST_SPACING_S - elapsed)
        self._last_request = time.monotonic()

    async def _get(self, url: str) -> str:
        for attempt in range(self.retries + 1):
            await self._pace()
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
        start = 0
        while len(records) < query.per_source_limit:
            count = min(MAX_PER_REQUEST, query.per_source_limit - len(records))
            body = await self._get(self._page_url(query, start, count))
            try:
                parsed = parse_feed(body)
            except ET.ParseError as exc:
                raise TransportError(f"malformed feed: {exc}", self.source.value, retryable=False)
            if not parsed:
                break
            start += len(parsed)
            for record in parsed:
                if len(records) >= query.per_source_limit:
                    break
                if query.year_range is not None:
                    year = record.payload.get("year")
                    lo, hi = query.year_range
                    if year is not None and not lo <= year <= hi:
                        continue
                stats.received += 1
                records.append(record)
            if len(parsed) < count:
                break
        return records, stats
