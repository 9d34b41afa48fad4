"""Corpus integrity walkthrough: trigram Dice, dedup, ranking, citation shadow.

Run:  python3 demos/01_dedupe_and_shadow.py
"""

from rhizome.integrity import (
    build_citation_shadow,
    dedupe,
    dice,
    normalize_doi,
    assign_ranks,
)
from rhizome.records import PaperRecord, SourceKind


def paper(pid, title, **kw):
    return PaperRecord(id=pid, source=SourceKind.OPEN_ALEX, title=title, **kw)


print("== DOI normalization ==")
for raw in ("https://doi.org/10.1000/ABC", "DOI:10.5555/X.Y", "not-a-doi"):
    print(f"  {raw!r:40} -> {normalize_doi(raw)!r}")

print("\n== Trigram Dice scores ==")
pairs = [
    ("energy transition", "energy transitions"),
    ("energy transition", "entropy accounting"),
    ("abcd", "abce"),
]
for a, b in pairs:
    print(f"  dice({a!r}, {b!r}) = {dice(a, b):.4f}")

print("\n== Dedup: DOI first, then title Dice >= 0.85 (transitive) ==")
records = [
    paper("open-alex:W1", "The energy transition", doi="10.1/x",
          abstract_text="has an abstract", venue="Research Policy", year=2021),
    paper("arxiv:1", "An entirely different preprint", doi="doi:10.1/X"),
    paper("open-alex:W2", "Smart meters and demand response"),
    paper("arxiv:2", "Smart meters and demand responses"),
    paper("open-alex:W3", "Something standalone and unique"),
]
corpus, clusters = dedupe(records)
print(f"  {len(records)} records -> {len(corpus)} canonical")
for cluster in clusters:
    print(f"  cluster {cluster.canonical_id}: members={cluster.member_ids} "
          f"basis={cluster.match_basis} score={cluster.dice_score}")

print("\n== Ranking: matched venues weighted, the rest flagged heterodox ==")
table = {"research policy": "4"}
ranked = assign_ranks(corpus, table)
for record in ranked:
    print(f"  {record.id:14} venue={record.venue!r:20} rank={record.abs_rank!r:5} "
          f"heterodox={record.heterodox_flag} weight={record.rigor_weight}")

print("\n== Citation shadow over a 5-paper chain ==")
chain = [
    paper(f"s:p{i}", f"chain paper {'x' * i}", year=2000 + i,
          referenced_ids=[f"p{i - 1}"] if i > 1 else [])
    for i in range(1, 6)
]
shadow = build_citation_shadow(chain)
print(f"  edges: {shadow.shadow_edges}")
for anchor in shadow.anchors:
    print(f"  anchor {anchor.paper_id}: citers={anchor.citers} "
          f"influence={anchor.influence_score:.2f}")
