"""HTTP-or-fixture transport used by both scholarly source clients."""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path
from urllib.parse import parse_qsl, urlencode, urlsplit, urlunsplit

import httpx


class TransportError(Exception):
    def __init__(self, message: str, source: str, retryable: bool = True):
        super().__init__(f"[{source}] {message}")
        self.source = source
        self.retryable = retryable


def canonical_url(url: str) -> str:
    """URL with query params sorted and volatile params (mailto) dropped."""
    parts = urlsplit(url)
    params = [(k, v) for k, v in parse_qsl(parts.query, keep_blank_values=True) if k != "mailto"]
    params.sort()
    return urlunsplit((parts.scheme, parts.netloc, parts.path, urlencode(params), ""))


def query_hash(url: str) -> str:
    return hashlib.sha256(canonical_url(url).encode("utf-8")).hexdigest()[:16]


def fixture_path(fixture_dir: str | Path, source: str, url: str) -> Path:
    return Path(fixture_dir) / f"{source}__{query_hash(url)}.json"


def write_api_fixture(fixture_dir: str | Path, source: str, url: str, body: str) -> Path:
    """Store one recorded response: verbatim body plus a small header."""
    path = fixture_path(fixture_dir, source, url)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(
            {
                "source": source,
                "query_hash": query_hash(url),
                "url": canonical_url(url),
                "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
                "body": body,
            },
            indent=2,
        ),
        encoding="utf-8",
    )
    return path


class HttpTransport:
    """Live GET transport; retry/backoff policy lives in the clients."""

    live = True

    def __init__(self, source: str, timeout: float = 30.0):
        self.source = source
        self._client = httpx.AsyncClient(timeout=timeout, follow_redirects=True)

    async def get(self, url: str) -> str:
        try:
            resp = await self._client.get(url)
        except httpx.HTTPError as exc:
            raise TransportError(str(exc), self.source) from exc
        if resp.status_code >= 500 or resp.status_code == 429:
            raise TransportError(f"status {resp.status_code}", self.source)
        if resp.status_code >= 400:
            raise TransportError(f"status {resp.status_code}", self.source, retryable=False)
        return resp.text

    async def aclose(self) -> None:
        await self._client.aclose()


class FixtureTransport:
    """Replays recorded responses keyed by query hash; misses are hard
    errors so offline runs fail loudly instead of silently fetching."""

    live = False

    def __init__(self, fixture_dir: str | Path, source: str):
        self.fixture_dir = Path(fixture_dir)
        self.source = source

    async def get(self, url: str) -> str:
        path = fixture_path(self.fixture_dir, self.source, url)
        if not path.exists():
            raise TransportError(
                f"no fixture for {canonical_url(url)} (expected {path.name})",
                self.source,
                retryable=False,
            )
        return json.loads(path.read_text(encoding="utf-8"))["body"]


class RecordingTransport:
    """Wraps a live transport and captures every response as a fixture."""

    live = True

    def __init__(self, inner: HttpTransport, fixture_dir: str | Path):
        self.inner = inner
        self.fixture_dir = Path(fixture_dir)
        self.source = inner.source

    async def get(self, url: str) -> str:
        body = await self.inner.get(url)
        write_api_fixture(self.fixture_dir, self.source, url, body)
        return body


class FailingTransport:
    """Always errors; handy for exercising partial-failure contracts."""

    live = False

    def __init__(self, source: str, retryable: bool = False):
        self.source = source
        self.retryable = retryable

    async def get(self, url: str) -> str:
        raise TransportError("transport disabled", self.source, retryable=self.retryable)
