"""REST + SSE surface over the run registry."""

from __future__ import annotations

import json
import logging
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from .config import RunConfig
from .events import EventLog, SubscriberLagged
from .runner import ConfigRejected, RunRegistry

log = logging.getLogger(__name__)


def _sse_frame(event) -> str:
    data = json.dumps(event.to_dict(), ensure_ascii=False)
    return f"id: {event.sequence}\nevent: {event.kind.value}\ndata: {data}\n\n"


async def _event_stream(event_log: EventLog, from_sequence: int):
    try:
        async for event in event_log.subscribe(from_sequence):
            yield _sse_frame(event)
    except SubscriberLagged as exc:
        payload = json.dumps({"error": "subscriber_lagged", "detail": str(exc)})
        yield f"event: error\ndata: {payload}\n\n"


def create_app(registry: RunRegistry | None = None, ui_dir: str | Path | None = None) -> FastAPI:
    registry = registry if registry is not None else RunRegistry()
    app = FastAPI(title="rhizome pipeline", version="0.1.0")
    app.state.registry = registry

    @app.post("/runs")
    async def start_run(request: Request):
        body = await request.json()
        try:
            config = RunConfig.from_dict(body)
        except (TypeError, ValueError) as exc:
            return JSONResponse({"errors": [{"field": "config", "reason": str(exc)}]}, status_code=400)
        try:
            run = registry.start(config)
        except ConfigRejected as exc:
            return JSONResponse(
                {"errors": [{"field": f, "reason": r} for f, r in exc.problems]},
                status_code=400,
            )
        return JSONResponse({"run_id": run.run_id}, status_code=201)

    @app.get("/runs/{run_id}")
    async def run_status(run_id: str):
        run = registry.get(run_id)
        if run is None:
            return JSONResponse({"error": "not_found"}, status_code=404)
        return run.status_view()

    @app.get("/runs/{run_id}/events")
    async def run_events(run_id: str, request: Request, from_sequence: int = 0):
        run = registry.get(run_id)
        if run is None:
            return JSONResponse({"error": "not_found"}, status_code=404)
        last_event_id = request.headers.get("Last-Event-ID")
        if last_event_id is not None and last_event_id.strip().isdigit():
            from_sequence = int(last_event_id.strip())
        return StreamingResponse(
            _event_stream(run.log, from_sequence),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "Connection": "keep-alive"},
        )

    @app.get("/runs/{run_id}/cartography")
    async def run_cartography(run_id: str):
        run = registry.get(run_id)
        if run is None:
            return JSONResponse({"error": "not_found"}, status_code=404)
        if run.cartography is None:
            return JSONResponse({"error": "not_ready", "status": run.status.value}, status_code=409)
        return run.cartography

    @app.get("/runs/{run_id}/graph")
    async def run_graph(run_id: str):
        run = registry.get(run_id)
        if run is None:
            return JSONResponse({"error": "not_found"}, status_code=404)
        return run.graph.to_dict()

    @app.get("/runs/{run_id}/topography")
    async def run_topography(run_id: str):
        run = registry.get(run_id)
        if run is None:
            return JSONResponse({"error": "not_found"}, status_code=404)
        return {
            "status": run.topography_status,
            "topography": run.topography.to_dict() if run.topography else None,
        }

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
