"""Semantic topography: clusters, voids, orthogonal isolations, and the
marginalization index, computed over externally supplied embeddings."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .integrity import normalize_match_text
from .records import PaperRecord
from .stopwords import STOPWORDS

log = logging.getLogger(__name__)

DEFAULT_GAP_RATIO = 2.0
DEFAULT_VOCAB_JACCARD = 0.30
DEFAULT_MIN_CLUSTER_SIZE = 3
DEFAULT_TOP_TERMS = 20
SMALL_N = 5  # below this, reduction/clustering degenerate to one cluster


class TopographyUnavailable(Exception):
    """Embedding source failed; the run completes without a topography."""


@dataclass
class EmbeddingMatrix:
    paper_ids: list[str]
    vectors: np.ndarray  # n x d
    model_name: str

    def validate(self, corpus_size: int | None = None) -> None:
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.paper_ids):
            raise ValueError("vector rows must match paper ids")
        if not np.isfinite(self.vectors).all():
            raise ValueError("embedding matrix contains non-finite values")
        if corpus_size is not None and len(self.paper_ids) != corpus_size:
            raise ValueError(
                f"matrix has {len(self.paper_ids)} rows for a corpus of {corpus_size}"
            )


@dataclass
class SemanticCluster:
    label: int
    member_ids: list[str]
    centroid_2d: tuple[float, float]
    rms_radius: float
    top_terms: list[str]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "member_ids": list(self.member_ids),
            "centroid_2d": list(self.centroid_2d),
            "rms_radius": self.rms_radius,
            "top_terms": list(self.top_terms),
        }


@dataclass
class SemanticVoid:
    cluster_pair: tuple[int, int]
    midpoint_2d: tuple[float, float]
    gap_ratio: float

    def to_dict(self) -> dict:
        return {
            "cluster_pair": list(self.cluster_pair),
            "midpoint_2d": list(self.midpoint_2d),
            "gap_ratio": self.gap_ratio,
        }


@dataclass
class OrthogonalIsolation:
    cluster_pair: tuple[int, int]
    vocab_jaccard: float
    centroid_distance: float

    def to_dict(self) -> dict:
        return {
            "cluster_pair": list(self.cluster_pair),
            "vocab_jaccard": self.vocab_jaccard,
            "centroid_distance": self.centroid_distance,
        }


@dataclass
class TopographyMap:
    paper_ids: list[str]
    points: np.ndarray  # n x 2
    cluster_labels: list[int]
    clusters: list[SemanticCluster]
    voids: list[SemanticVoid]
    isolations: list[OrthogonalIsolation]
    marginalization: dict[str, float]
    model_name: str = ""

    def to_dict(self) -> dict:
        return {
            "paper_ids": list(self.paper_ids),
            "points": [[float(x), float(y)] for x, y in self.points],
            "cluster_labels": [int(l) for l in self.cluster_labels],
            "clusters": [c.to_dict() for c in self.clusters],
            "voids": [v.to_dict() for v in self.voids],
            "isolations": [i.to_dict() for i in self.isolations],
            "marginalization": {k: float(v) for k, v in sorted(self.marginalization.items())},
            "model_name": self.model_name,
        }


# --- Term extraction ---------------------------------------------------------


def doc_terms(text: str) -> list[str]:
    return [
        tok
        for tok in normalize_match_text(text).split()
        if len(tok) >= 2 and not tok.isdigit() and tok not in STOPWORDS
    ]


def top_terms(
    member_ids: list[str], corpus: list[PaperRecord], k: int = DEFAULT_TOP_TERMS
) -> list[str]:
    """tf-idf ranked terms for one cluster over titles + abstracts.

    idf = ln(N/df) over corpus documents; terms present in every document
    drop out (idf 0). Ties break lexicographically.
    """
    if not member_ids:
        raise ValueError("cluster must be non-empty")
    docs = {p.id: doc_terms(p.text()) for p in corpus}
    n_docs = len(docs)
    df: dict[str, int] = {}
    for toks in docs.values():
        for term in set(toks):
            df[term] = df.get(term, 0) + 1
    tf: dict[str, int] = {}
    for pid in member_ids:
        for term in docs.get(pid, []):
            tf[term] = tf.get(term, 0) + 1
    scored = []
    for term, count in tf.items():
        idf = math.log(n_docs / df[term])
        score = count * idf
        if score > 0:
            scored.append((term, score))
    scored.sort(key=lambda item: (-item[1], item[0]))
    return [term for term, _ in scored[:k]]


# --- Geometry ------------------------------------------------------------------


def _rms_radius(points: np.ndarray, centroid: np.ndarray) -> float:
    if len(points) == 0:
        return 0.0
    return float(np.sqrt(np.mean(np.sum((points - centroid) ** 2, axis=1))))


def build_clusters(
    paper_ids: list[str],
    points: np.ndarray,
    labels: list[int],
    corpus: list[PaperRecord],
    top_k: int = DEFAULT_TOP_TERMS,
) -> list[SemanticCluster]:
    clusters = []
    for label in sorted({l for l in labels if l >= 0}):
        idx = [i for i, l in enumerate(labels) if l == label]
        member_points = points[idx]
        centroid = member_points.mean(axis=0)
        clusters.append(
            SemanticCluster(
                label=label,
                member_ids=[paper_ids[i] for i in idx],
                centroid_2d=(float(centroid[0]), float(centroid[1])),
                rms_radius=_rms_radius(member_points, centroid),
                top_terms=top_terms([paper_ids[i] for i in idx], corpus, top_k),
            )
        )
    return clusters


def _segment_distance(point: np.ndarray, a: np.ndarray, b: np.ndarray, t_lo: float, t_hi: float) -> float:
    """Distance from point to the segment {a + t(b-a) : t in [t_lo, t_hi]}."""
    direction = b - a
    denom = float(direction @ direction)
    if denom == 0.0:
        return float(np.linalg.norm(point - a))
    t = float((point - a) @ direction) / denom
    t = min(t_hi, max(t_lo, t))
    return float(np.linalg.norm(point - (a + t * direction)))


def detect_voids(
    points: np.ndarray,
    clusters: list[SemanticCluster],
    gap_ratio_threshold: float = DEFAULT_GAP_RATIO,
) -> list[SemanticVoid]:
    """Cluster pairs separated by more than the ratio threshold with an
    unoccupied middle-third corridor between their centroids.

    Every point counts as an occupant, noise included.
    """
    voids = []
    for i in range(len(clusters)):
        for j in range(i + 1, len(clusters)):
            a, b = clusters[i], clusters[j]
            ca = np.asarray(a.centroid_2d)
            cb = np.asarray(b.centroid_2d)
            distance = float(np.linalg.norm(ca - cb))
            radius_sum = a.rms_radius + b.rms_radius
            gap_ratio = distance / max(radius_sum, 1e-12)
            if distance <= gap_ratio_threshold * radius_sum:
                continue
            corridor_radius = min(a.rms_radius, b.rms_radius)
            occupied = any(
                _segment_distance(p, ca, cb, 1.0 / 3.0, 2.0 / 3.0) < corridor_radius
                for p in points
            )
            if occupied:
                continue
            midpoint = (ca + cb) / 2.0
            voids.append(
                SemanticVoid(
                    cluster_pair=(a.label, b.label),
                    midpoint_2d=(float(midpoint[0]), float(midpoint[1])),
                    gap_ratio=gap_ratio,
                )
            )
    return voids


def detect_isolations(
    clusters: list[SemanticCluster],
    vocab_jaccard_min: float = DEFAULT_VOCAB_JACCARD,
) -> list[OrthogonalIsolation]:
    """Cluster pairs that share vocabulary yet sit far apart on the map:
    term-set Jaccard >= threshold and centroid distance >= the median
    pairwise centroid distance."""
    if len(clusters) < 2:
        return []
    distances = {}
    for i in range(len(clusters)):
        for j in range(i + 1, len(clusters)):
            ca = np.asarray(clusters[i].centroid_2d)
            cb = np.asarray(clusters[j].centroid_2d)
            distances[(i, j)] = float(np.linalg.norm(ca - cb))
    median_distance = float(np.median(list(distances.values())))
    isolations = []
    for (i, j), distance in sorted(distances.items()):
        a, b = clusters[i], clusters[j]
        ta, tb = set(a.top_terms), set(b.top_terms)
        union = ta | tb
        jaccard = len(ta & tb) / len(union) if union else 0.0
        if jaccard >= vocab_jaccard_min and distance >= median_distance:
            isolations.append(
                OrthogonalIsolation(
                    cluster_pair=(a.label, b.label),
                    vocab_jaccard=jaccard,
                    centroid_distance=distance,
                )
            )
    return isolations


def marginalization(matrix: EmbeddingMatrix) -> dict[str, float]:
    """Normalized distance of every paper from the embedding-space centroid."""
    vectors = matrix.vectors
    if len(vectors) == 0:
        return {}
    centroid = vectors.mean(axis=0)
    distances = np.linalg.norm(vectors - centroid, axis=1)
    top = float(distances.max())
    if top == 0.0:
        return {pid: 0.0 for pid in matrix.paper_ids}
    return {pid: float(d / top) for pid, d in zip(matrix.paper_ids, distances)}


# --- Pipeline-facing assembly ---------------------------------------------------


def degenerate_layout(matrix: EmbeddingMatrix) -> tuple[np.ndarray, list[int]]:
    """Small-corpus path: everything is one cluster; the first two embedding
    components serve as map coordinates."""
    n, d = matrix.vectors.shape
    points = np.zeros((n, 2))
    points[:, : min(2, d)] = matrix.vectors[:, :2]
    return points, [0] * n


async def reduce_and_cluster(
    matrix: EmbeddingMatrix,
    sidecar,
    seed: int,
    min_cluster_size: int = DEFAULT_MIN_CLUSTER_SIZE,
) -> tuple[np.ndarray, list[int]]:
    """2-D projection plus cluster labels, via the sidecar service.

    Corpora below the small-n floor never touch the sidecar.
    """
    matrix.validate()
    if len(matrix.paper_ids) < SMALL_N:
        return degenerate_layout(matrix)
    points = await sidecar.reduce(matrix.vectors.tolist(), seed=seed)
    labels = await sidecar.cluster(points, min_cluster_size=min_cluster_size)
    pts = np.asarray(points, dtype=float)
    if pts.shape != (len(matrix.paper_ids), 2) or len(labels) != len(matrix.paper_ids):
        raise TopographyUnavailable("sidecar returned mismatched cardinalities")
    return pts, [int(l) for l in labels]


def build_topography(
    corpus: list[PaperRecord],
    matrix: EmbeddingMatrix,
    points: np.ndarray,
    labels: list[int],
    *,
    gap_ratio_threshold: float = DEFAULT_GAP_RATIO,
    vocab_jaccard_min: float = DEFAULT_VOCAB_JACCARD,
    top_k: int = DEFAULT_TOP_TERMS,
) -> TopographyMap:
    clusters = build_clusters(matrix.paper_ids, points, labels, corpus, top_k)
    return TopographyMap(
        paper_ids=list(matrix.paper_ids),
        points=points,
        cluster_labels=list(labels),
        clusters=clusters,
        voids=detect_voids(points, clusters, gap_ratio_threshold),
        isolations=detect_isolations(clusters, vocab_jaccard_min),
        marginalization=marginalization(matrix),
        model_name=matrix.model_name,
    )
