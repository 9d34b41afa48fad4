import math
import random

import numpy as np
import pytest

from rhizome.records import PaperRecord, SourceKind
from rhizome.sidecar_client import (
    TopographySource,
    load_injected_matrix,
    write_injected_matrix,
)
from rhizome.topography import (
    EmbeddingMatrix,
    SemanticCluster,
    build_clusters,
    build_topography,
    degenerate_layout,
    detect_isolations,
    detect_voids,
    marginalization,
    reduce_and_cluster,
    top_terms,
)

from conftest import run
from oracles import oracle_marginalization


def paper(pid, title, abstract=None):
    return PaperRecord(id=pid, source=SourceKind.OPEN_ALEX, title=title,
                       abstract_text=abstract)


def cluster(label, centroid, radius, terms=(), members=()):
    return SemanticCluster(label=label, member_ids=list(members),
                           centroid_2d=tuple(centroid), rms_radius=radius,
                           top_terms=list(terms))


class TestEmbeddingMatrix:
    def test_injected_matrix_bypasses_sidecar(self, tmp_path):
        ids = [f"p{i}" for i in range(8)]
        rows = [[float(i), 1.0, 2.0, 3.0] for i in range(8)]
        path = tmp_path / "m.json"
        write_injected_matrix(path, ids, rows)
        source = TopographySource(injected_path=path)
        corpus = [paper(pid, f"title {pid}") for pid in ids]
        matrix = run(source.embeddings_for(corpus))
        assert matrix.vectors.shape == (8, 4)
        assert matrix.paper_ids == ids
        assert matrix.model_name == "injected"

    def test_row_count_must_match_corpus(self, tmp_path):
        path = tmp_path / "m.json"
        write_injected_matrix(path, ["p0"], [[1.0, 2.0]])
        source = TopographySource(injected_path=path)
        corpus = [paper("p0", "a"), paper("p1", "b")]
        from rhizome.topography import TopographyUnavailable

        with pytest.raises(TopographyUnavailable):
            run(source.embeddings_for(corpus))

    def test_non_finite_rejected(self):
        matrix = EmbeddingMatrix(["a"], np.array([[1.0, float("nan")]]), "x")
        with pytest.raises(ValueError):
            matrix.validate()

    def test_injected_rerun_identical(self, tmp_path):
        ids = ["a", "b", "c"]
        rows = [[0.5, 0.25], [1.0, 2.0], [3.0, 4.0]]
        path = tmp_path / "m.json"
        write_injected_matrix(path, ids, rows)
        corpus = [paper(pid, pid) for pid in ids]
        m1 = run(TopographySource(injected_path=path).embeddings_for(corpus))
        m2 = run(TopographySource(injected_path=path).embeddings_for(corpus))
        assert np.array_equal(m1.vectors, m2.vectors)

    def test_malformed_file_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"paper_ids": ["a", "b"], "vectors": [[1.0]]}')
        with pytest.raises(ValueError):
            load_injected_matrix(path)


class TestReduceAndCluster:
    def test_small_n_degenerate(self):
        matrix = EmbeddingMatrix(
            ["a", "b", "c"],
            np.array([[1.0, 2.0, 9.0], [3.0, 4.0, 9.0], [5.0, 6.0, 9.0]]),
            "x",
        )
        points, labels = run(reduce_and_cluster(matrix, sidecar=None, seed=1))
        assert labels == [0, 0, 0]
        assert np.array_equal(points, matrix.vectors[:, :2])

    def test_degenerate_pads_one_dimensional(self):
        matrix = EmbeddingMatrix(["a", "b"], np.array([[1.0], [2.0]]), "x")
        points, labels = degenerate_layout(matrix)
        assert points.shape == (2, 2)
        assert points[0, 1] == 0.0

    def test_injected_layout_used_when_present(self, tmp_path):
        ids = [f"p{i}" for i in range(6)]
        rows = [[float(i)] * 4 for i in range(6)]
        points = [[float(i), float(-i)] for i in range(6)]
        labels = [0, 0, 0, 1, 1, 1]
        path = tmp_path / "m.json"
        write_injected_matrix(path, ids, rows, points, labels)
        source = TopographySource(injected_path=path)
        corpus = [paper(pid, pid) for pid in ids]
        matrix = run(source.embeddings_for(corpus))
        got_points, got_labels = run(source.layout(matrix, seed=5, min_cluster_size=3))
        assert got_labels == labels
        assert np.allclose(got_points, points)


class TestTopTerms:
    def test_tfidf_ranking(self):
        corpus = [paper("p0", "entropy entropy flux")]
        corpus += [paper(f"p{i}", f"unique{i} words here") for i in range(1, 10)]
        terms = top_terms(["p0"], corpus)
        assert terms[0] == "entropy"  # tf 2 x ln(10) beats flux's ln(10)
        assert "flux" in terms

    def test_term_in_every_document_excluded(self):
        corpus = [paper(f"p{i}", f"shared term{i}") for i in range(5)]
        terms = top_terms(["p0"], corpus)
        assert "shared" not in terms
        assert "term0" in terms

    def test_titles_only_when_no_abstracts(self):
        corpus = [paper("p0", "entropy budget"), paper("p1", "other things")]
        assert "entropy" in top_terms(["p0"], corpus)

    def test_stopwords_removed(self):
        corpus = [paper("p0", "the of and entropy"), paper("p1", "filler words")]
        terms = top_terms(["p0"], corpus)
        assert "the" not in terms and "entropy" in terms

    def test_tie_breaks_lexicographic(self):
        corpus = [paper("p0", "zeta alpha"), paper("p1", "unrelated corpus")]
        terms = top_terms(["p0"], corpus)
        assert terms == ["alpha", "zeta"]

    def test_empty_cluster_rejected(self):
        with pytest.raises(ValueError):
            top_terms([], [paper("p0", "x")])

    def test_hand_computed_scores(self):
        # Oracle by hand: tf("entropy")=2, df=1 of 4 -> 2*ln(4) = 2.772...
        corpus = [
            paper("p0", "entropy entropy grid"),
            paper("p1", "grid budget"),
            paper("p2", "grid things"),
            paper("p3", "unrelated item"),
        ]
        terms = top_terms(["p0"], corpus)
        entropy_score = 2 * math.log(4 / 1)
        grid_score = 1 * math.log(4 / 3)
        assert entropy_score > grid_score
        assert terms[0] == "entropy"


class TestDetectVoids:
    def test_two_far_blobs_yield_void(self):
        rng = random.Random(3)
        pts_a = [[rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)] for _ in range(10)]
        pts_b = [[20 + rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)] for _ in range(10)]
        points = np.array(pts_a + pts_b)
        labels = [0] * 10 + [1] * 10
        ca = points[:10].mean(axis=0)
        cb = points[10:].mean(axis=0)
        ra = float(np.sqrt(np.mean(np.sum((points[:10] - ca) ** 2, axis=1))))
        rb = float(np.sqrt(np.mean(np.sum((points[10:] - cb) ** 2, axis=1))))
        clusters = [cluster(0, ca, ra), cluster(1, cb, rb)]
        voids = detect_voids(points, clusters)
        assert len(voids) == 1
        void = voids[0]
        assert void.cluster_pair == (0, 1)
        # Geometric oracle: both conditions hold by construction.
        distance = float(np.linalg.norm(ca - cb))
        assert distance > 2.0 * (ra + rb)
        assert void.gap_ratio == pytest.approx(distance / (ra + rb))
        midpoint = (ca + cb) / 2
        assert void.midpoint_2d == pytest.approx(tuple(midpoint))

    def test_corridor_occupied_by_third_cluster(self):
        def blob(cx, n=6, spread=0.4, seed=0):
            rng = random.Random(seed)
            return [[cx + rng.uniform(-spread, spread), rng.uniform(-spread, spread)]
                    for _ in range(n)]

        pts = blob(0.0, seed=1) + blob(20.0, seed=2) + blob(10.0, seed=3)
        points = np.array(pts)
        labels = [0] * 6 + [1] * 6 + [2] * 6
        clusters = []
        for label, start in ((0, 0), (1, 6), (2, 12)):
            member = points[start : start + 6]
            centroid = member.mean(axis=0)
            radius = float(np.sqrt(np.mean(np.sum((member - centroid) ** 2, axis=1))))
            clusters.append(cluster(label, centroid, radius))
        voids = detect_voids(points, clusters)
        voided_pairs = {v.cluster_pair for v in voids}
        assert (0, 1) not in voided_pairs  # cluster 2 sits mid-corridor
        assert (0, 2) in voided_pairs and (1, 2) in voided_pairs

    def test_single_cluster_no_voids(self):
        points = np.array([[0.0, 0.0], [1.0, 0.0]])
        clusters = [cluster(0, (0.5, 0.0), 0.5)]
        assert detect_voids(points, clusters) == []

    def test_close_clusters_no_void(self):
        points = np.zeros((0, 2))
        clusters = [cluster(0, (0, 0), 1.0), cluster(1, (3.9, 0), 1.0)]
        # distance 3.9 <= 2.0 * (1+1): not a void
        assert detect_voids(points, clusters) == []

    def test_symmetric_in_pair_order(self):
        points = np.zeros((0, 2))
        a, b = cluster(0, (0, 0), 0.1), cluster(1, (10, 0), 0.1)
        v1 = detect_voids(points, [a, b])
        v2 = detect_voids(points, [b, a])
        assert len(v1) == len(v2) == 1
        assert set(v1[0].cluster_pair) == set(v2[0].cluster_pair)
        assert v1[0].gap_ratio == pytest.approx(v2[0].gap_ratio)


class TestDetectIsolations:
    def test_identical_vocab_distant_pair_flagged(self):
        shared = [f"term{i}" for i in range(20)]
        clusters = [
            cluster(0, (0, 0), 1.0, terms=shared),
            cluster(1, (5, 0), 1.0, terms=[f"other{i}" for i in range(20)]),
            cluster(2, (100, 0), 1.0, terms=shared),
        ]
        isolations = detect_isolations(clusters)
        pairs = {i.cluster_pair for i in isolations}
        assert (0, 2) in pairs
        flagged = next(i for i in isolations if i.cluster_pair == (0, 2))
        assert flagged.vocab_jaccard == 1.0

    def test_low_overlap_not_flagged(self):
        a = [f"t{i}" for i in range(20)]
        b = a[:2] + [f"u{i}" for i in range(18)]  # jaccard 2/38 ~ 0.053
        clusters = [cluster(0, (0, 0), 1.0, terms=a), cluster(1, (50, 0), 1.0, terms=b)]
        assert detect_isolations(clusters) == []

    def test_two_clusters_median_degenerate(self):
        shared = [f"t{i}" for i in range(10)]
        clusters = [cluster(0, (0, 0), 1.0, terms=shared),
                    cluster(1, (2, 0), 1.0, terms=shared)]
        isolations = detect_isolations(clusters)
        assert len(isolations) == 1  # distance == median, vocabulary decides

    def test_monotone_in_jaccard(self):
        base = [f"t{i}" for i in range(20)]
        geometry = [(0, 0), (50, 0)]
        flagged = []
        for shared_count in (2, 6, 10, 20):
            terms_b = base[:shared_count] + [f"u{i}" for i in range(20 - shared_count)]
            clusters = [cluster(0, geometry[0], 1.0, terms=base),
                        cluster(1, geometry[1], 1.0, terms=terms_b)]
            flagged.append(bool(detect_isolations(clusters)))
        assert flagged == sorted(flagged)  # once flagged, stays flagged

    def test_fewer_than_two_clusters(self):
        assert detect_isolations([cluster(0, (0, 0), 1.0, terms=["a"])]) == []


class TestMarginalization:
    def test_two_symmetric_points(self):
        matrix = EmbeddingMatrix(["a", "b"], np.array([[0.0, 0.0], [2.0, 0.0]]), "x")
        assert marginalization(matrix) == {"a": 1.0, "b": 1.0}

    def test_midpoint_is_zero(self):
        matrix = EmbeddingMatrix(["a", "b", "c"], np.array([[0.0], [1.0], [2.0]]), "x")
        assert marginalization(matrix) == {"a": 1.0, "b": 0.0, "c": 1.0}

    def test_all_equal_rows(self):
        matrix = EmbeddingMatrix(["a", "b"], np.ones((2, 3)), "x")
        assert marginalization(matrix) == {"a": 0.0, "b": 0.0}

    def test_matches_bruteforce_oracle(self):
        rng = np.random.default_rng(11)
        rows = rng.normal(size=(50, 7))
        ids = [f"p{i:02d}" for i in range(50)]
        got = marginalization(EmbeddingMatrix(ids, rows, "x"))
        expected = oracle_marginalization(rows.tolist())
        for pid, value in zip(ids, expected):
            assert got[pid] == pytest.approx(value, rel=1e-9)

    def test_translation_and_scale_invariance(self):
        rng = np.random.default_rng(4)
        rows = rng.normal(size=(20, 5))
        ids = [f"p{i}" for i in range(20)]
        base = marginalization(EmbeddingMatrix(ids, rows, "x"))
        shifted = marginalization(EmbeddingMatrix(ids, rows + 37.5, "x"))
        scaled = marginalization(EmbeddingMatrix(ids, rows * 4.25, "x"))
        for pid in ids:
            assert shifted[pid] == pytest.approx(base[pid], rel=1e-9)
            assert scaled[pid] == pytest.approx(base[pid], rel=1e-9)
        assert max(base.values()) == 1.0


class TestBuildTopography:
    def test_full_map_assembly(self):
        corpus = [paper(f"p{i}", f"entropy topic {i}", "entropy entropy") for i in range(6)]
        corpus += [paper(f"q{i}", f"repair topic {i}", "repair repair") for i in range(6)]
        ids = [p.id for p in corpus]
        rng = np.random.default_rng(8)
        vectors = rng.normal(size=(12, 6))
        points = np.array(
            [[0 + 0.1 * i, 0.0] for i in range(6)] + [[30 + 0.1 * i, 0.0] for i in range(6)]
        )
        labels = [0] * 6 + [1] * 6
        matrix = EmbeddingMatrix(ids, vectors, "test")
        topo = build_topography(corpus, matrix, points, labels)
        assert len(topo.clusters) == 2
        assert len(topo.cluster_labels) == 12
        assert set(topo.marginalization) == set(ids)
        assert topo.voids, "far-separated tight blobs must yield a void"
        doc = topo.to_dict()
        assert doc["model_name"] == "test"
        assert len(doc["points"]) == 12

    def test_clusters_honor_min_size_from_labels(self):
        corpus = [paper(f"p{i}", f"topic {i}") for i in range(5)]
        points = np.array([[float(i), 0.0] for i in range(5)])
        labels = [0, 0, 0, -1, -1]  # noise stays out of clusters
        clusters = build_clusters([p.id for p in corpus], points, labels, corpus)
        assert len(clusters) == 1
        assert len(clusters[0].member_ids) == 3
