"""Clients for the embedding sidecar plus the injected-matrix test mode."""

from __future__ import annotations

import json
import logging
from pathlib import Path

import httpx
import numpy as np

from .records import PaperRecord
from .topography import (
    EmbeddingMatrix,
    TopographyUnavailable,
    degenerate_layout,
    SMALL_N,
)

log = logging.getLogger(__name__)


class SidecarClient:
    """Thin async wrapper over the sidecar's /embed, /reduce, /cluster."""

    def __init__(self, base_url: str, timeout: float = 120.0, client: httpx.AsyncClient | None = None):
        self.base_url = base_url.rstrip("/")
        self._client = client or httpx.AsyncClient(timeout=timeout)

    async def _post(self, path: str, body: dict) -> dict:
        try:
            resp = await self._client.post(f"{self.base_url}{path}", json=body)
            resp.raise_for_status()
        except httpx.HTTPError as exc:
            raise TopographyUnavailable(f"sidecar {path} failed: {exc}") from exc
        return resp.json()

    async def health(self) -> dict:
        try:
            resp = await self._client.get(f"{self.base_url}/health")
            resp.raise_for_status()
        except httpx.HTTPError as exc:
            raise TopographyUnavailable(f"sidecar health failed: {exc}") from exc
        return resp.json()

    async def embed(self, texts: list[str], model: str | None = None) -> tuple[list[list[float]], str]:
        body: dict = {"texts": texts}
        if model:
            body["model"] = model
        data = await self._post("/embed", body)
        return data["vectors"], data.get("model", model or "")

    async def reduce(self, vectors: list[list[float]], seed: int, target_dim: int = 2) -> list[list[float]]:
        data = await self._post("/reduce", {"vectors": vectors, "seed": seed, "target_dim": target_dim})
        return data["points"]

    async def cluster(self, points: list[list[float]], min_cluster_size: int = 3) -> list[int]:
        data = await self._post("/cluster", {"points": points, "min_cluster_size": min_cluster_size})
        return data["labels"]

    async def aclose(self) -> None:
        await self._client.aclose()


def load_injected_matrix(path: str | Path) -> dict:
    """Injected-matrix file: JSON with paper_ids + vector rows, and optional
    precomputed 2-D points and cluster labels for fully offline runs."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    for key in ("paper_ids", "vectors"):
        if key not in data:
            raise ValueError(f"injected matrix file missing {key!r}")
    if len(data["paper_ids"]) != len(data["vectors"]):
        raise ValueError("injected matrix ids and rows disagree")
    return data


def write_injected_matrix(
    path: str | Path,
    paper_ids: list[str],
    vectors,
    points=None,
    labels=None,
    model_name: str = "injected",
) -> None:
    body: dict = {
        "model_name": model_name,
        "paper_ids": list(paper_ids),
        "vectors": [list(map(float, row)) for row in vectors],
    }
    if points is not None:
        body["points"] = [list(map(float, row)) for row in points]
    if labels is not None:
        body["labels"] = [int(l) for l in labels]
    Path(path).write_text(json.dumps(body, indent=2), encoding="utf-8")


class TopographySource:
    """Resolves embeddings and layout from whatever is configured: an
    injected matrix file, a live sidecar, or both (injected vectors win)."""

    def __init__(self, sidecar: SidecarClient | None = None, injected_path: str | Path | None = None,
                 model: str | None = None):
        if sidecar is None and injected_path is None:
            raise ValueError("topography source needs a sidecar or an injected matrix")
        self.sidecar = sidecar
        self.model = model
        self._injected = load_injected_matrix(injected_path) if injected_path else None

    async def embeddings_for(self, corpus: list[PaperRecord]) -> EmbeddingMatrix:
        if self._injected is not None:
            index = {pid: i for i, pid in enumerate(self._injected["paper_ids"])}
            missing = [p.id for p in corpus if p.id not in index]
            if missing:
                raise TopographyUnavailable(
                    f"injected matrix lacks rows for {len(missing)} papers (e.g. {missing[0]})"
                )
            rows = [self._injected["vectors"][index[p.id]] for p in corpus]
            matrix = EmbeddingMatrix(
                paper_ids=[p.id for p in corpus],
                vectors=np.asarray(rows, dtype=float),
                model_name=self._injected.get("model_name", "injected"),
            )
        else:
            vectors, model_name = await self.sidecar.embed([p.text() for p in corpus], self.model)
            matrix = EmbeddingMatrix(
                paper_ids=[p.id for p in corpus],
                vectors=np.asarray(vectors, dtype=float),
                model_name=model_name,
            )
        matrix.validate(corpus_size=len(corpus))
        return matrix

    async def layout(
        self, matrix: EmbeddingMatrix, seed: int, min_cluster_size: int
    ) -> tuple[np.ndarray, list[int]]:
        if self._injected is not None and "points" in self._injected and "labels" in self._injected:
            index = {pid: i for i, pid in enumerate(self._injected["paper_ids"])}
            rows = [index[pid] for pid in matrix.paper_ids]
            points = np.asarray([self._injected["points"][i] for i in rows], dtype=float)
            labels = [int(self._injected["labels"][i]) for i in rows]
            return points, labels
        if len(matrix.paper_ids) < SMALL_N:
            return degenerate_layout(matrix)
        if self.sidecar is None:
            raise TopographyUnavailable("no sidecar configured and injected file lacks a layout")
        points = await self.sidecar.reduce(matrix.vectors.tolist(), seed=seed)
        labels = await self.sidecar.cluster(points, min_cluster_size=min_cluster_size)
        pts = np.asarray(points, dtype=float)
        if pts.shape != (len(matrix.paper_ids), 2) or len(labels) != len(matrix.paper_ids):
            raise TopographyUnavailable("sidecar returned mismatched cardinalities")
        return pts, [int(l) for l in labels]


async def compute_embeddings(corpus: list[PaperRecord], source: TopographySource) -> EmbeddingMatrix:
    """One vector per paper over title + abstract, validated finite."""
    return await source.embeddings_for(corpus)
