"""Command-line front door: `rhizome run` and `rhizome serve`."""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys
from pathlib import Path

from ..agents import ProviderConfig
from ..synthesis import serialize_cartography
from .config import RunConfig
from .events import EventKind
from .runner import ConfigRejected, PipelineRun, RunStatus


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rhizome", description="Rhizomatic literature-analysis pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute one full seven-phase run")
    run.add_argument("--zone", required=True, help="phenomenon zone text")
    run.add_argument("--max-papers", type=int, default=25, help="per-source fetch limit")
    run.add_argument("--llm", choices=["fixture", "live"], default="fixture")
    run.add_argument("--endpoint", default=None, help="chat-completion endpoint for --llm live")
    run.add_argument("--model", default=None, help="model name for --llm live")
    run.add_argument("--fixtures", default=None, help="fixture directory (llm/ and api/ subdirs)")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", default=None, help="write the cartography JSON here")
    run.add_argument("--dice-threshold", type=float, default=0.85)
    run.add_argument("--centralization-threshold", type=float, default=0.40)
    run.add_argument("--k-fraction", type=float, default=0.05)
    run.add_argument("--gap-ratio", type=float, default=2.0)
    run.add_argument("--vocab-jaccard", type=float, default=0.30)
    run.add_argument("--top-m", type=int, default=50,
                     help="model-reading budget per lens; negative = whole corpus")
    run.add_argument("--max-reentries", type=int, default=2)
    run.add_argument("--traditions", default=None, help="comma-separated heterodox traditions")
    run.add_argument("--abs-ranks", default=None, help="journal,rank CSV path")
    run.add_argument("--sidecar", default=None, help="embedding sidecar base URL")
    run.add_argument("--inject-embeddings", default=None, help="injected matrix JSON path")
    run.add_argument("--mailto", default=None, help="contact email for polite API use")
    run.add_argument("--quiet", action="store_true", help="suppress event narration")

    serve = sub.add_parser("serve", help="start the REST/SSE service")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--ui-dir", default=None, help="static frontend build to mount at /ui")
    return parser


def config_from_args(args) -> RunConfig:
    if args.llm == "fixture":
        if not args.fixtures:
            raise ConfigRejected([("fixtures", "--fixtures is required with --llm fixture")])
        provider = ProviderConfig(kind="fixture", fixture_path=str(Path(args.fixtures) / "llm"))
        api_fixture_dir = str(Path(args.fixtures) / "api")
    else:
        endpoint = args.endpoint or os.environ.get("RHIZOME_LLM_ENDPOINT")
        if not endpoint:
            raise ConfigRejected([("endpoint", "--endpoint or RHIZOME_LLM_ENDPOINT required with --llm live")])
        provider = ProviderConfig(kind="live-http", endpoint=endpoint, model_name=args.model)
        api_fixture_dir = str(Path(args.fixtures) / "api") if args.fixtures else None
    kwargs = dict(
        zone=args.zone,
        per_source_limit=args.max_papers,
        dice_threshold=args.dice_threshold,
        centralization_threshold=args.centralization_threshold,
        k_fraction=args.k_fraction,
        gap_ratio_threshold=args.gap_ratio,
        vocab_jaccard_min=args.vocab_jaccard,
        top_m=None if args.top_m < 0 else args.top_m,
        max_reentries=args.max_reentries,
        abs_rank_csv=args.abs_ranks,
        sidecar_url=args.sidecar,
        injected_matrix_path=args.inject_embeddings,
        provider=provider,
        api_fixture_dir=api_fixture_dir,
        seed=args.seed,
        mailto=args.mailto or os.environ.get("OPENALEX_MAILTO"),
    )
    if args.traditions:
        kwargs["traditions"] = tuple(t.strip() for t in args.traditions.split(",") if t.strip())
    return RunConfig(**kwargs)


async def _narrate(run: PipelineRun, quiet: bool) -> None:
    async for event in run.log.subscribe(0):
        if quiet:
            continue
        kind = event.kind.value
        phase = event.phase or "-"
        if event.kind is EventKind.PHASE_STARTED:
            print(f"[{event.sequence:04d}] >> {phase}")
        elif event.kind is EventKind.PHASE_COMPLETED:
            print(f"[{event.sequence:04d}] << {phase}")
        elif event.kind in (EventKind.RUN_COMPLETED, EventKind.RUN_FAILED):
            print(f"[{event.sequence:04d}] {kind}: {json.dumps(event.payload)}")
        else:
            print(f"[{event.sequence:04d}]    {phase} {kind}")


async def _run_pipeline(config: RunConfig, out: str | None, quiet: bool) -> int:
    run = PipelineRun(config)
    narrator = asyncio.create_task(_narrate(run, quiet))
    document = await run.execute()
    await narrator
    if run.status is not RunStatus.COMPLETED:
        print(f"run failed: {run.error}", file=sys.stderr)
        return 1
    if out:
        Path(out).write_text(serialize_cartography(document), encoding="utf-8")
        if not quiet:
            print(f"cartography written to {out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn

        from .server import create_app

        app = create_app(ui_dir=args.ui_dir)
        uvicorn.run(app, host=args.host, port=args.port)
        return 0
    try:
        config = config_from_args(args)
        return asyncio.run(_run_pipeline(config, args.out, args.quiet))
    except ConfigRejected as exc:
        for field, reason in exc.problems:
            print(f"config error: {field}: {reason}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
