"""Independent brute-force oracles the implementation is checked against.

Everything here is written from the operation definitions alone, with no
imports from the package under test, so oracle and implementation cannot
share a bug.
"""

from __future__ import annotations

import math

import networkx as nx


def oracle_normalize(text: str) -> str:
    out = []
    for ch in text.lower():
        if "a" <= ch <= "z" or "0" <= ch <= "9":
            out.append(ch)
        else:
            out.append(" ")
    return " ".join("".join(out).split())


def oracle_trigrams(text: str) -> set[str]:
    norm = oracle_normalize(text)
    if not norm:
        return set()
    if len(norm) < 3:
        return {norm}
    grams = set()
    for i in range(len(norm) - 2):
        grams.add(norm[i : i + 3])
    return grams


def oracle_dice(a: str, b: str) -> float:
    ta, tb = oracle_trigrams(a), oracle_trigrams(b)
    if not ta and not tb:
        return 1.0
    shared = 0
    for gram in ta:
        if gram in tb:
            shared += 1
    return 2.0 * shared / (len(ta) + len(tb))


def oracle_doi(raw: str | None) -> str | None:
    if raw is None:
        return None
    value = raw.strip().lower()
    for prefix in ("https://doi.org/", "http://doi.org/", "https://dx.doi.org/",
                   "http://dx.doi.org/", "doi.org/", "doi:"):
        while value.startswith(prefix):
            value = value[len(prefix):].strip()
    return value if value.startswith("10.") else None


def oracle_dedupe_groups(records, threshold: float) -> set[frozenset[str]]:
    """All-pairs O(n^2) clustering via connected components."""
    graph = nx.Graph()
    graph.add_nodes_from(r.id for r in records)
    by_doi: dict[str, list[str]] = {}
    for record in records:
        doi = oracle_doi(record.doi)
        if doi:
            by_doi.setdefault(doi, []).append(record.id)
    for ids in by_doi.values():
        for a, b in zip(ids, ids[1:]):
            graph.add_edge(a, b)
    items = list(records)
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            if oracle_dice(items[i].title, items[j].title) >= threshold:
                graph.add_edge(items[i].id, items[j].id)
    return {frozenset(component) for component in nx.connected_components(graph)}


def oracle_centralization(node_ids, edges, threshold=0.40, k_fraction=0.05):
    """Brute-force degree sort; returns (fraction, triggered)."""
    if not edges:
        return 0.0, False
    degree = {}
    for node in node_ids:
        count = 0
        for u, v in edges:
            if u == node:
                count += 1
            if v == node:
                count += 1
        degree[node] = count
    k = max(1, math.ceil(k_fraction * len(node_ids)))
    ranked = sorted(degree, key=lambda n: (-degree[n], n))
    hubs = set(ranked[:k])
    incident = 0
    for u, v in edges:
        if u in hubs or v in hubs:
            incident += 1
    fraction = incident / len(edges)
    return fraction, fraction > threshold


def oracle_marginalization(rows: list[list[float]]) -> list[float]:
    n = len(rows)
    d = len(rows[0])
    centroid = [sum(row[j] for row in rows) / n for j in range(d)]
    dists = [math.sqrt(sum((row[j] - centroid[j]) ** 2 for j in range(d))) for row in rows]
    top = max(dists)
    if top == 0:
        return [0.0] * n
    return [dist / top for dist in dists]


def oracle_term_count(term: str, text: str) -> int:
    """Whole-word overlapping occurrence count, via raw string scanning."""
    padded = " " + oracle_normalize(text) + " "
    needle = " " + oracle_normalize(term) + " "
    if needle.strip() == "":
        return 0
    count = 0
    for i in range(len(padded)):
        if padded.startswith(needle, i):
            count += 1
    return count


def oracle_citer_counts(corpus) -> dict[str, int]:
    """Exhaustive in-corpus citation counting."""
    keys = {}
    for record in corpus:
        native = record.id.split(":", 1)[-1]
        keys[native] = record.id
        keys[record.id] = record.id
        doi = oracle_doi(record.doi)
        if doi:
            keys[doi] = record.id
    counts: dict[str, int] = {}
    for record in corpus:
        cited = set()
        for ref in record.referenced_ids:
            target = keys.get(ref) or keys.get(oracle_doi(ref) or "")
            if target and target != record.id:
                cited.add(target)
        for target in cited:
            counts[target] = counts.get(target, 0) + 1
    return counts
