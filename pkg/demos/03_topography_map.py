"""Semantic topography on synthetic embeddings: clusters, voids, isolations,
and the marginalization index.

Run:  python3 demos/03_topography_map.py          (prints the map)
      python3 demos/03_topography_map.py --plot   (also writes topography.png)
"""

import sys

import numpy as np

from rhizome.records import PaperRecord, SourceKind
from rhizome.topography import EmbeddingMatrix, build_topography

rng = np.random.default_rng(7)

# Three blobs: two share vocabulary but sit far apart (a disciplinary silo),
# the third sits between them with its own terms.
texts = (
    ["grid entropy dispatch telemetry shared vocabulary"] * 8
    + ["policy affect embodiment narrative practice"] * 8
    + ["grid entropy dispatch telemetry shared vocabulary"] * 8
)
corpus = [
    PaperRecord(id=f"p{i:02d}", source=SourceKind.OPEN_ALEX,
                title=f"synthetic paper {i}", abstract_text=text)
    for i, text in enumerate(texts)
]
centers = np.array([[0.0, 0.0], [14.0, 0.0], [60.0, 0.0]])
points = np.vstack([
    centers[k] + rng.uniform(-0.6, 0.6, size=(8, 2)) for k in range(3)
])
labels = [0] * 8 + [1] * 8 + [2] * 8
vectors = np.hstack([points, rng.normal(size=(24, 6))])

topo = build_topography(corpus, EmbeddingMatrix([p.id for p in corpus], vectors, "demo"),
                        points, labels)

print("== Clusters ==")
for cluster in topo.clusters:
    print(f"  label {cluster.label}: {len(cluster.member_ids)} papers, "
          f"centroid=({cluster.centroid_2d[0]:.1f}, {cluster.centroid_2d[1]:.1f}), "
          f"rms={cluster.rms_radius:.2f}, top terms: {cluster.top_terms[:5]}")

print("\n== Semantic voids (gaps with an empty corridor) ==")
for void in topo.voids:
    print(f"  between clusters {void.cluster_pair} at "
          f"({void.midpoint_2d[0]:.1f}, {void.midpoint_2d[1]:.1f}), "
          f"gap ratio {void.gap_ratio:.1f}")

print("\n== Orthogonal isolations (shared vocabulary, distant on the map) ==")
for isolation in topo.isolations:
    print(f"  clusters {isolation.cluster_pair}: vocabulary jaccard "
          f"{isolation.vocab_jaccard:.2f}, distance {isolation.centroid_distance:.1f}")

print("\n== Marginalization (distance from the embedding centroid) ==")
ranked = sorted(topo.marginalization.items(), key=lambda kv: -kv[1])
for pid, index in ranked[:5]:
    print(f"  {pid}: {index:.3f}")

if "--plot" in sys.argv:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(9, 4))
    colors = np.array(labels)
    sizes = 20 + 180 * np.array([topo.marginalization[p.id] for p in corpus])
    ax.scatter(points[:, 0], points[:, 1], c=colors, s=sizes, cmap="viridis", alpha=0.8)
    for void in topo.voids:
        ax.scatter(*void.midpoint_2d, marker="x", c="red", s=80)
    for isolation in topo.isolations:
        a = next(c for c in topo.clusters if c.label == isolation.cluster_pair[0])
        b = next(c for c in topo.clusters if c.label == isolation.cluster_pair[1])
        ax.plot([a.centroid_2d[0], b.centroid_2d[0]],
                [a.centroid_2d[1], b.centroid_2d[1]], "r--", linewidth=1)
    ax.set_title("semantic topography: x = void midpoints, dashes = isolations")
    fig.tight_layout()
    fig.savefig("topography.png", dpi=120)
    print("\nwrote topography.png")
