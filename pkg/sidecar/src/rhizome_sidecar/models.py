"""Model backends: deterministic echo vectors, an optional transformer
embedder, seeded 2-D reduction, and HDBSCAN clustering."""

from __future__ import annotations

import hashlib
import logging
import threading

import numpy as np
from sklearn.cluster import HDBSCAN
from sklearn.decomposition import PCA

log = logging.getLogger(__name__)

ECHO_MODEL = "echo"
ECHO_DIM = 32
DEFAULT_REAL_MODEL = "allenai/scibert_scivocab_uncased"

try:
    import umap  # type: ignore

    HAVE_UMAP = True
except ImportError:  # pragma: no cover - depends on environment
    umap = None
    HAVE_UMAP = False


class ModelNotReady(Exception):
    """Real-model requests are refused until the weights are loaded."""


def echo_vector(text: str, dim: int = ECHO_DIM) -> list[float]:
    """Hash-derived pseudo-embedding: bit-deterministic, no weights."""
    values = []
    for k in range(dim):
        digest = hashlib.sha256(f"{text}|{k}".encode("utf-8")).digest()
        raw = int.from_bytes(digest[:8], "big") / 2**64
        values.append(raw * 2.0 - 1.0)
    return values


def echo_embed(texts: list[str], dim: int = ECHO_DIM) -> list[list[float]]:
    return [echo_vector(t, dim) for t in texts]


class TransformerEmbedder:
    """Lazy mean-pooled transformer embeddings; one shared instance."""

    def __init__(self, model_name: str):
        self.model_name = model_name
        self._lock = threading.Lock()
        self._tokenizer = None
        self._model = None
        self._error: str | None = None

    @property
    def loaded(self) -> bool:
        return self._model is not None

    def load(self) -> None:
        with self._lock:
            if self._model is not None:
                return
            if self._error is not None:
                raise ModelNotReady(self._error)
            try:
                import torch  # noqa: F401
                from transformers import AutoModel, AutoTokenizer

                self._tokenizer = AutoTokenizer.from_pretrained(self.model_name)
                self._model = AutoModel.from_pretrained(self.model_name)
                self._model.eval()
            except Exception as exc:  # model download/load failure -> 503
                self._error = f"model {self.model_name!r} unavailable: {exc}"
                log.warning("%s", self._error)
                raise ModelNotReady(self._error) from exc

    def embed(self, texts: list[str]) -> list[list[float]]:
        self.load()
        import torch

        with torch.no_grad():
            batch = self._tokenizer(
                texts, padding=True, truncation=True, max_length=512, return_tensors="pt"
            )
            hidden = self._model(**batch).last_hidden_state
            mask = batch["attention_mask"].unsqueeze(-1).float()
            pooled = (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1e-9)
        return pooled.cpu().numpy().tolist()


def reduce_points(vectors: list[list[float]], target_dim: int, seed: int) -> list[list[float]]:
    """Seeded 2-D (or target_dim) projection.

    Uses UMAP when the library is installed; otherwise falls back to a
    deterministic PCA projection so the contract (seed-stable layout that
    preserves separation) still holds.
    """
    data = np.asarray(vectors, dtype=float)
    if data.ndim != 2:
        raise ValueError("vectors must be a 2-D array")
    n, d = data.shape
    target_dim = min(target_dim, d)
    if n <= target_dim:
        out = np.zeros((n, target_dim))
        out[:, : min(target_dim, d)] = data[:, :target_dim]
        return out.tolist()
    if HAVE_UMAP:
        n_neighbors = max(2, min(15, n - 1))
        reducer = umap.UMAP(
            n_components=target_dim, random_state=seed, n_neighbors=n_neighbors, min_dist=0.1
        )
        return reducer.fit_transform(data).tolist()
    pca = PCA(n_components=target_dim, random_state=seed, svd_solver="full")
    return pca.fit_transform(data).tolist()


def reducer_name() -> str:
    return "umap" if HAVE_UMAP else "pca"


def cluster_labels(points: list[list[float]], min_cluster_size: int) -> list[int]:
    data = np.asarray(points, dtype=float)
    if data.ndim != 2:
        raise ValueError("points must be a 2-D array")
    if len(data) < min_cluster_size:
        return [-1] * len(data)
    labels = HDBSCAN(min_cluster_size=min_cluster_size).fit_predict(data)
    return [int(l) for l in labels]
