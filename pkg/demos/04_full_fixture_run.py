"""Full offline pipeline run: builds the deterministic fixture scenario, then
executes all seven phases and writes the cartography document.

Run:  python3 demos/04_full_fixture_run.py
"""

import asyncio
from pathlib import Path

from rhizome.fixturekit import build_demo_scenario
from rhizome.orchestrator.events import EventKind
from rhizome.orchestrator.runner import PipelineRun
from rhizome.synthesis import serialize_cartography

root = Path("demo_fixtures")
print(f"building offline scenario under {root}/ (api + llm fixtures, matrix) ...")
scenario = build_demo_scenario(root)
print(f"  main corpus: {scenario.main_corpus_size} papers across both sources\n")


async def main():
    run = PipelineRun(scenario.config)

    async def narrate():
        async for event in run.log.subscribe(0):
            kind = event.kind
            if kind is EventKind.PHASE_STARTED:
                print(f">> {event.payload['phase']}")
            elif kind is EventKind.LENSES_GENERATED:
                names = [l["name"] for l in event.payload["lenses"]]
                print(f"   lenses: {', '.join(names)}")
            elif kind is EventKind.PAPERS_FETCHED:
                print(f"   fetched {event.payload.get('received', 0)} "
                      f"from {event.payload['source']}")
            elif kind is EventKind.DUPLICATES_REMOVED:
                print(f"   dedupe: {event.payload['before']} -> {event.payload['after']}")
            elif kind is EventKind.ANOMALY_DETECTED:
                print(f"   anomaly: {event.payload['canonical_tension']!r} "
                      f"({' + '.join(event.payload['lens_names'])})")
            elif kind is EventKind.RUPTURE_TRIGGERED:
                frac = event.payload["report"]["incident_fraction"]
                print(f"   !! rupture: {frac:.0%} of edges on the hub set "
                      f"(re-entry {event.payload['reentry_index']})")
            elif kind is EventKind.REENTRY_COMPLETED:
                print(f"   re-entry injected {len(event.payload['injected_paper_ids'])} "
                      f"heterodox papers (corpus now {event.payload['corpus_size']})")
            elif kind is EventKind.ASSEMBLAGE_BUILT:
                print(f"   assemblage: {event.payload['title']!r}")
            elif kind is EventKind.TOPOGRAPHY_READY:
                print(f"   topography: {event.payload['clusters']} clusters, "
                      f"{event.payload['voids']} voids, "
                      f"{event.payload['isolations']} isolations")
            elif kind is EventKind.RUN_COMPLETED:
                print("run completed")

    narrator = asyncio.create_task(narrate())
    document = await run.execute()
    await narrator
    return document


document = asyncio.run(main())
out = Path("cartography.json")
out.write_text(serialize_cartography(document), encoding="utf-8")
print(f"\nwrote {out} ({out.stat().st_size // 1024} KiB)")
print(f"edges: {len(document['graph']['edges'])}, "
      f"anomalies: {len(document['anomalies'])}, "
      f"heterodox: {document['corpus_summary']['heterodox_count']} of "
      f"{document['corpus_summary']['total']}")
print("\nthe same run is reachable via the CLI:")
print("  rhizome run --zone 'energy-information nexus' --llm fixture \\")
print("      --fixtures demo_fixtures --abs-ranks demo_fixtures/abs_ranks.csv \\")
print("      --inject-embeddings demo_fixtures/injected_matrix.json --out cartography.json")
