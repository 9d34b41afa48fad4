import itertools
import random

import pytest

from rhizome.lenses import LensReading
from rhizome.records import FetchQuery, PaperRecord, SourceKind
from rhizome.resonance import (
    DEFAULT_TRADITIONS,
    CentralizationReport,
    ReentryExhausted,
    canonical_tension,
    centralization_risk,
    detect_anomalies,
    heterodox_reentry,
)

from conftest import run
from oracles import oracle_centralization


def reading(lens, paper, tensions=(), confidence=0.8):
    return LensReading(lens_name=lens, paper_id=paper, tensions=list(tensions),
                       confidence=confidence)


class TestCanonicalTension:
    def test_case_whitespace_punctuation(self):
        assert canonical_tension("  Energy   data is POWER.  ") == "energy data is power"
        assert canonical_tension("what now?!") == "what now"
        assert canonical_tension("keep: inner; marks...") == "keep: inner; marks"


class TestDetectAnomalies:
    def test_two_lens_convergence_intensity(self):
        readings = [
            reading("A", "p1", ["Energy data is power."], confidence=0.9),
            reading("B", "p2", ["energy data is power"], confidence=0.7),
        ]
        [anomaly] = detect_anomalies(readings)
        assert anomaly.canonical_tension == "energy data is power"
        assert anomaly.lens_names == ["A", "B"]
        assert anomaly.paper_ids == ["p1", "p2"]
        assert anomaly.intensity == pytest.approx(2 * 0.8)

    def test_single_lens_repeat_is_not_anomaly(self):
        readings = [
            reading("A", "p1", ["grid labor is invisible"]),
            reading("A", "p2", ["grid labor is invisible"]),
        ]
        assert detect_anomalies(readings) == []

    def test_planted_three_anomalies_match_grouping_oracle(self):
        rng = random.Random(42)
        lenses = ["L1", "L2", "L3", "L4"]
        papers = [f"p{i}" for i in range(35)]
        planted = {
            "tension alpha rises": [("L1", "p1", 0.9), ("L2", "p2", 0.7)],
            "tension beta returns": [("L2", "p3", 0.6), ("L3", "p3", 0.8), ("L1", "p4", 1.0)],
            "tension gamma loops": [("L3", "p5", 0.5), ("L4", "p6", 0.5)],
        }
        readings = []
        for canon, contributors in planted.items():
            for lens, paper, conf in contributors:
                decorated = canon.upper() + "!!" if rng.random() < 0.5 else canon + "."
                readings.append(reading(lens, paper, [decorated], conf))
        # Noise: single-lens tensions and empty readings.
        for i, (lens, paper) in enumerate(itertools.product(lenses, papers)):
            if i % 9 == 0:
                readings.append(reading(lens, paper, [f"solo tension {lens} {i}"]))
            else:
                readings.append(reading(lens, paper, []))
        rng.shuffle(readings)
        anomalies = detect_anomalies(readings)
        assert len(anomalies) == 3
        got = {a.canonical_tension: a for a in anomalies}
        for canon, contributors in planted.items():
            anomaly = got[canon]
            assert anomaly.lens_names == sorted({c[0] for c in contributors})
            assert anomaly.paper_ids == sorted({c[1] for c in contributors})
            confs = [c[2] for c in contributors]
            expected = len(anomaly.lens_names) * sum(confs) / len(confs)
            assert anomaly.intensity == pytest.approx(expected)
        # Sorted by intensity descending.
        intensities = [a.intensity for a in anomalies]
        assert intensities == sorted(intensities, reverse=True)

    def test_permutation_invariant(self):
        readings = [
            reading("A", "p1", ["x marks the spot"], 0.4),
            reading("B", "p2", ["X marks the spot!"], 0.6),
            reading("C", "p3", ["another thing"], 0.6),
            reading("A", "p4", ["another thing"], 0.9),
        ]
        forward = [a.to_dict() for a in detect_anomalies(readings)]
        backward = [a.to_dict() for a in detect_anomalies(list(reversed(readings)))]
        assert forward == backward

    def test_every_anomaly_cites_two_lenses(self):
        readings = [
            reading("A", "p1", ["t one"], 0.5),
            reading("B", "p1", ["t one"], 0.5),
            reading("B", "p2", ["t two"], 0.5),
        ]
        for anomaly in detect_anomalies(readings):
            assert len(anomaly.lens_names) >= 2


class TestCentralizationRisk:
    def test_star_triggers(self):
        nodes = [f"n{i}" for i in range(11)]
        edges = [("n0", f"n{i}") for i in range(1, 11)]
        report = centralization_risk(nodes, edges)
        assert report.k == 1
        assert report.hub_ids == ["n0"]
        assert report.incident_fraction == 1.0
        assert report.triggered is True

    def test_cycle_of_20_does_not_trigger(self):
        nodes = [f"n{i:02d}" for i in range(20)]
        edges = [(nodes[i], nodes[(i + 1) % 20]) for i in range(20)]
        report = centralization_risk(nodes, edges)
        assert report.k == 1
        assert report.incident_fraction == pytest.approx(2 / 20)
        assert report.triggered is False

    def test_exact_threshold_does_not_trigger(self):
        # One hub incident to exactly 4 of 10 edges: fraction 0.40 == threshold.
        nodes = [f"h{i}" for i in range(1)] + [f"m{i}" for i in range(12)]
        edges = [("h0", f"m{i}") for i in range(4)]
        edges += [(f"m{2 * i}", f"m{2 * i + 1}") for i in range(6)]
        report = centralization_risk(nodes, edges, threshold=0.40, k_fraction=0.01)
        assert report.k == 1
        assert report.hub_ids == ["h0"]
        assert report.incident_fraction == pytest.approx(0.40)
        assert report.triggered is False

    def test_no_edges_report(self):
        report = centralization_risk(["a", "b"], [])
        assert report.incident_fraction == 0.0
        assert report.triggered is False

    def test_matches_oracle_exhaustively_small(self):
        for n in range(1, 6):
            nodes = [f"v{i}" for i in range(n)]
            possible = list(itertools.combinations(nodes, 2))
            for mask in range(2 ** len(possible)):
                edges = [possible[i] for i in range(len(possible)) if mask >> i & 1]
                report = centralization_risk(nodes, edges)
                frac, trig = oracle_centralization(nodes, edges)
                assert report.incident_fraction == pytest.approx(frac)
                assert report.triggered == trig

    def test_matches_oracle_random_graphs(self):
        rng = random.Random(2024)
        for _ in range(100):
            n = rng.randrange(2, 61)
            nodes = [f"v{i:02d}" for i in range(n)]
            m = rng.randrange(0, max(1, n * 2))
            edges = []
            for _ in range(m):
                u, v = rng.sample(nodes, 2)
                edges.append((u, v))
            report = centralization_risk(nodes, edges)
            frac, trig = oracle_centralization(nodes, edges)
            assert report.incident_fraction == pytest.approx(frac)
            assert report.triggered == trig
            assert trig == (frac > 0.40)


class _StubIngest:
    """Returns a fixed batch per (zone+tradition) query; counts calls."""

    def __init__(self, batches=None, fail=False):
        self.batches = batches or {}
        self.fail = fail
        self.queries: list[FetchQuery] = []

    async def ingest(self, query):
        from rhizome.records import FetchReport

        self.queries.append(query)
        report = FetchReport()
        if self.fail:
            stats = report.stats(SourceKind.OPEN_ALEX)
            stats.failed = 1
            stats.failures.append("stub transport down")
            return [], report
        records = self.batches.get(query.zone_text, [])
        report.stats(SourceKind.OPEN_ALEX).received = len(records)
        return list(records), report


def _triggered_report():
    return CentralizationReport(hub_ids=["h"], k=1, incident_fraction=0.9,
                                threshold=0.4, triggered=True)


def _rec(pid, title):
    return PaperRecord(id=pid, source=SourceKind.OPEN_ALEX, title=title)


class TestHeterodoxReentry:
    def test_default_traditions_are_the_named_pair(self):
        assert DEFAULT_TRADITIONS == ("degrowth economics", "indigenous ontologies")

    def test_injects_tagged_records(self):
        corpus = [_rec("base:1", "an existing record")]
        batches = {
            "zone degrowth economics": [_rec("new:1", "sufficiency provisioning study")],
            "zone indigenous ontologies": [_rec("new:2", "relational land ethics work")],
        }
        stub = _StubIngest(batches)
        merged, injected, event = run(
            heterodox_reentry("zone", list(DEFAULT_TRADITIONS), corpus, stub,
                              _triggered_report(), reentry_index=1)
        )
        assert len(merged) == 3
        assert {r.id for r in injected} == {"new:1", "new:2"}
        for record in injected:
            assert record.source is SourceKind.HETERODOX_REENTRY
            assert record.heterodox_flag is True
        assert event.reentry_index == 1
        assert event.traditions_queried == list(DEFAULT_TRADITIONS)
        assert sorted(event.injected_paper_ids) == ["new:1", "new:2"]
        assert len(stub.queries) == 2

    def test_existing_records_never_mutated(self):
        base = _rec("base:1", "energy transition")
        snapshot = base.to_dict()
        batches = {"zone degrowth economics": [_rec("dupe:1", "energy transitions")]}
        merged, injected, _ = run(
            heterodox_reentry("zone", ["degrowth economics"], [base], _StubIngest(batches),
                              _triggered_report(), reentry_index=1)
        )
        assert injected == []
        assert merged[0] is base
        assert base.to_dict() == snapshot

    def test_budget_exhausted_refused(self):
        with pytest.raises(ReentryExhausted):
            run(
                heterodox_reentry("zone", ["degrowth economics"], [], _StubIngest(),
                                  _triggered_report(), reentry_index=3, max_reentries=2)
            )

    def test_untriggered_report_rejected(self):
        report = CentralizationReport(hub_ids=[], k=1, incident_fraction=0.1,
                                      threshold=0.4, triggered=False)
        with pytest.raises(ValueError):
            run(heterodox_reentry("zone", ["x"], [], _StubIngest(), report, reentry_index=1))

    def test_all_fetches_fail_logs_empty_event(self):
        stub = _StubIngest(fail=True)
        merged, injected, event = run(
            heterodox_reentry("zone", list(DEFAULT_TRADITIONS), [], stub,
                              _triggered_report(), reentry_index=1)
        )
        assert merged == [] and injected == []
        assert event.injected_paper_ids == []
        assert event.failures
