"""Centralization risk on knowledge graphs and the strict >40% trigger.

Run:  python3 demos/02_centralization_and_rupture.py
"""

from rhizome.resonance import DEFAULT_TRADITIONS, centralization_risk


def show(name, nodes, edges, **kw):
    report = centralization_risk(nodes, edges, **kw)
    print(f"  {name:24} |V|={len(nodes):3} |E|={len(edges):3} k={report.k} "
          f"hubs={report.hub_ids[:3]}{'...' if len(report.hub_ids) > 3 else ''} "
          f"fraction={report.incident_fraction:.3f} triggered={report.triggered}")
    return report


print("== Hub concentration: fraction of edges incident to the top-5% nodes ==")
star_nodes = [f"n{i}" for i in range(11)]
show("star (1 hub, 10 leaves)", star_nodes, [("n0", f"n{i}") for i in range(1, 11)])

cycle_nodes = [f"n{i:02d}" for i in range(20)]
show("cycle of 20", cycle_nodes,
     [(cycle_nodes[i], cycle_nodes[(i + 1) % 20]) for i in range(20)])

print("\n== The trigger is strict: exactly 40% does NOT fire ==")
nodes = ["hub"] + [f"m{i}" for i in range(12)]
edges = [("hub", f"m{i}") for i in range(4)]
edges += [(f"m{2 * i}", f"m{2 * i + 1}") for i in range(6)]
show("exactly 0.40 incident", nodes, edges, k_fraction=0.01)

print("\n== When the trigger fires, re-entry queries these traditions ==")
for tradition in DEFAULT_TRADITIONS:
    print(f"  - {tradition}")
print("(see demos/04_full_fixture_run.py for the trigger firing inside a run)")
