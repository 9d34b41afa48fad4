import json

import pytest

from rhizome.ingestion import (
    ArxivClient,
    FailingTransport,
    FixtureTransport,
    IngestService,
    OpenAlexClient,
    RecordRejected,
    normalize_record,
    parse_feed,
    reconstruct_abstract,
    write_api_fixture,
)
from rhizome.ingestion.transport import canonical_url, fixture_path
from rhizome.records import FetchQuery, SourceKind, SourceRecord

from conftest import run


def _openalex_body(count, zone="energy-information nexus"):
    works = []
    for i in range(1, count + 1):
        works.append(
            {
                "id": f"https://openalex.org/W{i:04d}",
                "doi": f"https://doi.org/10.5555/w{i:04d}",
                "title": f"Distinct topic {'alpha beta gamma delta epsilon zeta'.split()[i % 6]} work {i}",
                "publication_year": 2010 + i % 12,
                "cited_by_count": i,
                "abstract_inverted_index": {"energy": [0], "flows": [1]},
                "authorships": [{"author": {"display_name": f"A{i}"}}],
                "primary_location": {"source": {"display_name": "Energy Policy"}},
                "referenced_works": ["https://openalex.org/W0001"] if i > 1 else [],
            }
        )
    return json.dumps({"meta": {"count": count}, "results": works})


def _arxiv_body(count):
    entries = []
    for i in range(1, count + 1):
        entries.append(
            "<entry>"
            f"<id>http://arxiv.org/abs/2301.{i:05d}v2</id>"
            f"<published>2023-0{(i % 9) + 1}-01T00:00:00Z</published>"
            f"<title>Preprint on subject {'kappa lambda mu nu xi omicron pi rho sigma tau'.split()[i % 10]} {i}</title>"
            f"<summary>entropy and grids {i}</summary>"
            "<author><name>Jo Doe</name></author>"
            "</entry>"
        )
    return (
        '<?xml version="1.0"?><feed xmlns="http://www.w3.org/2005/Atom" '
        'xmlns:arxiv="http://arxiv.org/schemas/atom">' + "".join(entries) + "</feed>"
    )


def _service(tmp_path, oa_count=25, ax_count=10, oa_limit=25, ax_limit=10, zone="energy-information nexus"):
    oa = OpenAlexClient(FixtureTransport(tmp_path, "open-alex"))
    ax = ArxivClient(FixtureTransport(tmp_path, "arxiv"))
    q_oa = FetchQuery(zone_text=zone, per_source_limit=oa_limit)
    q_ax = FetchQuery(zone_text=zone, per_source_limit=ax_limit)
    write_api_fixture(tmp_path, "open-alex", oa._page_url(q_oa, 1, min(200, oa_limit)), _openalex_body(oa_count))
    write_api_fixture(tmp_path, "arxiv", ax._page_url(q_ax, 0, min(100, ax_limit)), _arxiv_body(ax_count))
    return IngestService(oa, ax)


class TestNormalizeRecord:
    def test_title_whitespace_collapsed(self):
        raw = SourceRecord(SourceKind.OPEN_ALEX, "W1", {"title": "  A\n B ", "id": "x/W1"})
        assert normalize_record(raw).title == "A B"

    def test_inverted_index_reconstruction(self):
        assert reconstruct_abstract({"energy": [0], "flows": [1]}) == "energy flows"
        assert reconstruct_abstract({"b": [1, 3], "a": [0, 2]}) == "a b a b"
        assert reconstruct_abstract(None) is None

    def test_untitled_rejected(self):
        raw = SourceRecord(SourceKind.OPEN_ALEX, "W1", {"title": "   ", "id": "x/W1"})
        with pytest.raises(RecordRejected, match="untitled"):
            normalize_record(raw)

    def test_initial_flags(self):
        raw = SourceRecord(SourceKind.OPEN_ALEX, "W1", {"title": "T", "id": "x/W1"})
        record = normalize_record(raw)
        assert record.heterodox_flag is False
        assert record.rigor_weight == 1.0

    def test_arxiv_fields(self):
        body = _arxiv_body(1)
        [raw] = parse_feed(body)
        assert raw.native_id == "2301.00001"  # version suffix stripped
        record = normalize_record(raw)
        assert record.source is SourceKind.ARXIV
        assert record.referenced_ids == []
        assert record.year == 2023
        assert record.authors == ["Jo Doe"]


class TestFetchSource:
    def test_zero_limit_empty(self, tmp_path):
        service = _service(tmp_path)
        q = FetchQuery(zone_text="anything", per_source_limit=0)
        records, stats = run(service.openalex.fetch(q))
        assert records == []
        assert stats.received == 0

    def test_openalex_fixture_25(self, tmp_path):
        service = _service(tmp_path)
        q = FetchQuery(zone_text="energy-information nexus", per_source_limit=25)
        records, stats = run(service.openalex.fetch(q))
        assert len(records) == 25  # oracle: the fixture is built with 25 entries
        assert stats.received == 25
        normalized = [normalize_record(r) for r in records]
        assert all(r.doi for r in normalized)
        assert any(r.referenced_ids for r in normalized)

    def test_arxiv_fixture_10_no_references(self, tmp_path):
        service = _service(tmp_path)
        q = FetchQuery(zone_text="energy-information nexus", per_source_limit=10)
        records, stats = run(service.arxiv.fetch(q))
        assert len(records) == 10
        assert stats.received == 10
        assert all(normalize_record(r).referenced_ids == [] for r in records)

    def test_missing_fixture_is_transport_error(self, tmp_path):
        service = _service(tmp_path)
        q = FetchQuery(zone_text="unknown zone", per_source_limit=5)
        from rhizome.ingestion import TransportError

        with pytest.raises(TransportError):
            run(service.openalex.fetch(q))

    def test_openalex_pagination_keeps_page_size_constant(self, tmp_path):
        # A 250-record request pages as 200 + 200 (constant per-page, offsets
        # aligned), with the final page truncated client-side.
        oa = OpenAlexClient(FixtureTransport(tmp_path, "open-alex"))
        q = FetchQuery(zone_text="big zone", per_source_limit=250)
        page1 = json.loads(_openalex_body(200, zone="big zone"))
        page2 = json.loads(_openalex_body(200, zone="big zone"))
        for offset, work in enumerate(page2["results"], start=201):
            work["id"] = f"https://openalex.org/W{offset:04d}"
        write_api_fixture(tmp_path, "open-alex", oa._page_url(q, 1, 200), json.dumps(page1))
        write_api_fixture(tmp_path, "open-alex", oa._page_url(q, 2, 200), json.dumps(page2))
        records, stats = run(oa.fetch(q))
        assert len(records) == 250
        assert stats.received == 250
        assert len({r.native_id for r in records}) > 200  # page 2 contributed

    def test_recording_transport_round_trips(self, tmp_path):
        from rhizome.ingestion import RecordingTransport
        from rhizome.ingestion.transport import FixtureTransport as FT

        class StubLive:
            source = "open-alex"
            live = True

            async def get(self, url):
                return _openalex_body(3)

        url = "https://api.openalex.org/works?search=x&per-page=3&page=1"
        recorder = RecordingTransport(StubLive(), tmp_path)
        body = run(recorder.get(url))
        replayed = run(FT(tmp_path, "open-alex").get(url))
        assert replayed == body


class TestIngest:
    def test_both_sources_concatenated(self, tmp_path):
        service = _service(tmp_path)
        # Both sources share one query in ingest(); build fixtures for a
        # common limit.
        zone = "energy-information nexus"
        q = FetchQuery(zone_text=zone, per_source_limit=25)
        write_api_fixture(
            tmp_path, "arxiv", service.arxiv._page_url(q, 0, 25), _arxiv_body(10)
        )
        records, report = run(service.ingest(q))
        assert len(records) == 35
        assert report.sources["open-alex"].received == 25
        assert report.sources["arxiv"].received == 10
        # Deterministic order: (source, native id).
        assert records == sorted(records, key=lambda r: (r.source.value, r.id))
        assert all(r.title for r in records)

    def test_partial_failure_returns_partial_corpus(self, tmp_path):
        oa = OpenAlexClient(FixtureTransport(tmp_path, "open-alex"))
        ax = ArxivClient(FailingTransport("arxiv"))
        zone = "energy-information nexus"
        q = FetchQuery(zone_text=zone, per_source_limit=25)
        write_api_fixture(tmp_path, "open-alex", oa._page_url(q, 1, 25), _openalex_body(25))
        service = IngestService(oa, ax)
        records, report = run(service.ingest(q))
        assert len(records) == 25
        assert report.sources["arxiv"].failed >= 1
        assert report.sources["arxiv"].failures

    def test_both_limits_zero(self, tmp_path):
        service = _service(tmp_path)
        records, report = run(service.ingest(FetchQuery(zone_text="z", per_source_limit=0)))
        assert records == []
        assert report.sources["open-alex"].received == 0
        assert report.sources["arxiv"].received == 0

    def test_deterministic_given_fixtures(self, tmp_path):
        service = _service(tmp_path)
        zone = "energy-information nexus"
        q = FetchQuery(zone_text=zone, per_source_limit=25)
        write_api_fixture(
            tmp_path, "arxiv", service.arxiv._page_url(q, 0, 25), _arxiv_body(10)
        )
        first, _ = run(service.ingest(q))
        second, _ = run(service.ingest(q))
        assert [r.to_dict() for r in first] == [r.to_dict() for r in second]

    def test_malformed_work_counted_failed(self, tmp_path):
        oa = OpenAlexClient(FixtureTransport(tmp_path, "open-alex"))
        q = FetchQuery(zone_text="z", per_source_limit=5)
        body = json.dumps(
            {"results": [{"id": "https://openalex.org/W1", "title": "ok"},
                          {"id": "https://openalex.org/W2", "title": "   "}]}
        )
        write_api_fixture(tmp_path, "open-alex", oa._page_url(q, 1, 5), body)
        ax = ArxivClient(FailingTransport("arxiv"))
        records, report = run(IngestService(oa, ax).ingest(q))
        assert len(records) == 1
        assert report.sources["open-alex"].failed == 1
        assert "untitled" in report.sources["open-alex"].failures[0]

    def test_invalid_query_rejected(self, tmp_path):
        service = _service(tmp_path)
        with pytest.raises(ValueError):
            run(service.ingest(FetchQuery(zone_text="z", per_source_limit=10_000)))


class TestFixtureFormat:
    def test_mailto_excluded_from_key(self):
        a = canonical_url("https://api.openalex.org/works?search=x&mailto=me@example.org&page=1")
        b = canonical_url("https://api.openalex.org/works?page=1&search=x")
        assert a == b

    def test_fixture_header_fields(self, tmp_path):
        url = "https://api.openalex.org/works?search=x"
        path = write_api_fixture(tmp_path, "open-alex", url, "{}")
        stored = json.loads(path.read_text())
        assert stored["source"] == "open-alex"
        assert stored["query_hash"]
        assert stored["timestamp"]
        assert stored["body"] == "{}"
        assert path == fixture_path(tmp_path, "open-alex", url)
