from .arxiv import ArxivClient, parse_feed
from .openalex import OpenAlexClient, reconstruct_abstract
from .service import IngestService, RecordRejected, normalize_record
from .transport import (
    FailingTransport,
    FixtureTransport,
    HttpTransport,
    RecordingTransport,
    TransportError,
    write_api_fixture,
)

__all__ = [
    "ArxivClient",
    "FailingTransport",
    "FixtureTransport",
    "HttpTransport",
    "IngestService",
    "OpenAlexClient",
    "RecordRejected",
    "RecordingTransport",
    "TransportError",
    "normalize_record",
    "parse_feed",
    "reconstruct_abstract",
    "write_api_fixture",
]
