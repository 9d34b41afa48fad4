"""HTTP surface: /embed, /reduce, /cluster, /health."""

from __future__ import annotations

import argparse
import logging

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .models import (
    DEFAULT_REAL_MODEL,
    ECHO_MODEL,
    ModelNotReady,
    TransformerEmbedder,
    cluster_labels,
    echo_embed,
    reduce_points,
    reducer_name,
)

log = logging.getLogger(__name__)


class EmbedRequest(BaseModel):
    texts: list[str] = Field(min_length=1)
    model: str | None = None


class ReduceRequest(BaseModel):
    vectors: list[list[float]] = Field(min_length=1)
    target_dim: int = 2
    seed: int = 0


class ClusterRequest(BaseModel):
    points: list[list[float]] | None = None
    vectors: list[list[float]] | None = None
    min_cluster_size: int = 3


def create_app(default_model: str = DEFAULT_REAL_MODEL) -> FastAPI:
    app = FastAPI(title="rhizome embedding sidecar", version=__version__)
    embedders: dict[str, TransformerEmbedder] = {}

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse({"error": "malformed body", "reason": exc.errors()}, status_code=400)

    @app.middleware("http")
    async def version_header(request: Request, call_next):
        response = await call_next(request)
        response.headers["X-Sidecar-Model"] = default_model
        response.headers["X-Sidecar-Version"] = __version__
        return response

    @app.get("/health")
    async def health():
        return {
            "status": "ok",
            "default_model": default_model,
            "reducer": reducer_name(),
            "loaded_models": sorted(n for n, e in embedders.items() if e.loaded),
            "versions": {
                "sidecar": __version__,
                "numpy": np.__version__,
            },
        }

    @app.post("/embed")
    async def embed(body: EmbedRequest):
        model = body.model or default_model
        if model == ECHO_MODEL:
            vectors = echo_embed(body.texts)
        else:
            embedder = embedders.setdefault(model, TransformerEmbedder(model))
            try:
                vectors = embedder.embed(body.texts)
            except ModelNotReady as exc:
                return JSONResponse({"error": str(exc)}, status_code=503)
        if not all(np.isfinite(row).all() for row in np.asarray(vectors)):
            return JSONResponse({"error": "non-finite embedding"}, status_code=500)
        return {"vectors": vectors, "model": model, "dim": len(vectors[0])}

    @app.post("/reduce")
    async def reduce(body: ReduceRequest):
        try:
            points = reduce_points(body.vectors, body.target_dim, body.seed)
        except ValueError as exc:
            return JSONResponse({"error": "malformed body", "reason": str(exc)}, status_code=400)
        return {"points": points}

    @app.post("/cluster")
    async def cluster(body: ClusterRequest):
        data = body.points if body.points is not None else body.vectors
        if data is None:
            return JSONResponse(
                {"error": "malformed body", "reason": "points or vectors required"},
                status_code=400,
            )
        try:
            labels = cluster_labels(data, body.min_cluster_size)
        except ValueError as exc:
            return JSONResponse({"error": "malformed body", "reason": str(exc)}, status_code=400)
        return {"labels": labels}

    return app


def main(argv=None) -> int:
    import uvicorn

    parser = argparse.ArgumentParser(prog="rhizome-sidecar")
    parser.add_argument("--port", type=int, default=8100)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--model", default=DEFAULT_REAL_MODEL,
                        help="default embedding model (echo = offline hash vectors)")
    args = parser.parse_args(argv)
    uvicorn.run(create_app(args.model), host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
