"""Corpus integrity pass: DOI normalization, trigram-Dice dedup, journal
ranking with heterodox flagging, and the citation shadow."""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .records import PaperRecord, SourceKind, collapse_whitespace

DEFAULT_DICE_THRESHOLD = 0.85
ABS_RANKS = ("4*", "4", "3", "2", "1")

# Configuration defaults; institutional-rigor weights are heuristics, not
# properties of the rank scheme itself.
DEFAULT_RANK_WEIGHTS = {
    "4*": 1.0,
    "4": 0.9,
    "3": 0.75,
    "2": 0.6,
    "1": 0.5,
    "unranked": 0.5,
}

_DOI_PREFIXES = (
    "https://doi.org/",
    "http://doi.org/",
    "https://dx.doi.org/",
    "http://dx.doi.org/",
    "doi.org/",
    "doi:",
)

_NON_ALNUM = re.compile(r"[^a-z0-9]+")


def normalize_doi(raw: str | None) -> str | None:
    """Strip URL/scheme prefixes and lowercase; None unless it starts "10."."""
    if raw is None:
        return None
    value = raw.strip().lower()
    changed = True
    while changed:
        changed = False
        for prefix in _DOI_PREFIXES:
            if value.startswith(prefix):
                value = value[len(prefix):]
                changed = True
    value = value.strip()
    if not value.startswith("10."):
        return None
    return value


def normalize_match_text(text: str) -> str:
    """Lowercase, fold punctuation to spaces, collapse whitespace."""
    return collapse_whitespace(_NON_ALNUM.sub(" ", text.lower()))


def trigram_set(text: str) -> frozenset[str]:
    """Distinct character trigrams of the normalized text.

    A normalized text shorter than three characters contributes itself as a
    single token; empty text yields the empty set.
    """
    norm = normalize_match_text(text)
    if not norm:
        return frozenset()
    if len(norm) < 3:
        return frozenset((norm,))
    return frozenset(norm[i : i + 3] for i in range(len(norm) - 2))


def dice(a: str, b: str) -> float:
    """Trigram Dice coefficient between two texts, in [0, 1]."""
    ta, tb = trigram_set(a), trigram_set(b)
    if not ta and not tb:
        return 1.0
    return 2.0 * len(ta & tb) / (len(ta) + len(tb))


class UnionFind:
    def __init__(self, items):
        self.parent = {item: item for item in items}

    def find(self, item):
        root = item
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[item] != root:
            self.parent[item], item = root, self.parent[item]
        return root

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra

    def groups(self) -> dict:
        out: dict = {}
        for item in self.parent:
            out.setdefault(self.find(item), []).append(item)
        return out


@dataclass
class DuplicateCluster:
    canonical_id: str
    member_ids: list[str]
    match_basis: str  # "doi" | "title-dice"
    dice_score: float | None = None

    def to_dict(self) -> dict:
        return {
            "canonical_id": self.canonical_id,
            "member_ids": list(self.member_ids),
            "match_basis": self.match_basis,
            "dice_score": self.dice_score,
        }


_SOURCE_PRIORITY = {
    SourceKind.OPEN_ALEX: 0,
    SourceKind.ARXIV: 1,
    SourceKind.HETERODOX_REENTRY: 2,
}


def _populated_fields(record: PaperRecord) -> int:
    return sum(
        1
        for present in (
            record.doi,
            record.abstract_text,
            record.authors,
            record.venue,
            record.year is not None,
            record.referenced_ids,
        )
        if present
    )


def _canonical_sort_key(record: PaperRecord):
    return (-_populated_fields(record), _SOURCE_PRIORITY[record.source], record.id)


def _blocking_key(norm_title: str) -> str:
    return norm_title[:1]


def _length_band_ok(a: str, b: str) -> bool:
    la, lb = len(a), len(b)
    if la == 0 or lb == 0:
        return la == lb
    lo, hi = sorted((la, lb))
    return hi <= lo * 1.4


def dedupe(
    records: list[PaperRecord],
    threshold: float = DEFAULT_DICE_THRESHOLD,
    *,
    pinned_ids: set[str] | None = None,
) -> tuple[list[PaperRecord], list[DuplicateCluster]]:
    """Merge records sharing a normalized DOI or a title Dice >= threshold.

    Merging is transitive (union-find). The surviving record is the one with
    more populated fields (ties: open-alex over arxiv, then smaller id);
    records whose ids appear in ``pinned_ids`` always win canonical selection,
    which lets re-entry merging leave the pre-existing corpus untouched.
    Returns the canonical corpus in input order plus one cluster per merge
    group.
    """
    if not 0 < threshold <= 1:
        raise ValueError("threshold must be in (0, 1]")
    if not records:
        return [], []
    by_id: dict[str, PaperRecord] = {}
    order: list[str] = []
    uf = UnionFind([r.id for r in records])
    for r in records:
        if r.id in by_id:
            # Identical ids are the same work by construction.
            uf.union(by_id[r.id].id, r.id)
            continue
        by_id[r.id] = r
        order.append(r.id)

    # DOI pass.
    doi_edges: set[tuple[str, str]] = set()
    doi_map: dict[str, str] = {}
    for rid in order:
        d = normalize_doi(by_id[rid].doi)
        if d is None:
            continue
        if d in doi_map:
            uf.union(doi_map[d], rid)
            doi_edges.add((doi_map[d], rid))
        else:
            doi_map[d] = rid

    # Title pass, blocked by first character and a +/-40% length band so the
    # pairwise stage stays tractable at the hard cap.
    norm_titles = {rid: normalize_match_text(by_id[rid].title) for rid in order}
    blocks: dict[str, list[str]] = {}
    for rid in order:
        blocks.setdefault(_blocking_key(norm_titles[rid]), []).append(rid)
    dice_edges: dict[tuple[str, str], float] = {}
    for members in blocks.values():
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                a, b = members[i], members[j]
                if not _length_band_ok(norm_titles[a], norm_titles[b]):
                    continue
                score = dice(by_id[a].title, by_id[b].title)
                if score >= threshold:
                    uf.union(a, b)
                    dice_edges[(a, b)] = score

    corpus: list[PaperRecord] = []
    clusters: list[DuplicateCluster] = []
    pinned = pinned_ids or set()
    for root, members in sorted(uf.groups().items(), key=lambda kv: kv[0]):
        members = sorted(members, key=lambda rid: _canonical_sort_key(by_id[rid]))
        if pinned:
            members.sort(key=lambda rid: rid not in pinned)
        canonical = by_id[members[0]]
        if len(members) == 1:
            corpus.append(canonical)
            continue
        refs: set[str] = set()
        cited = 0
        for rid in members:
            refs.update(by_id[rid].referenced_ids)
            cited = max(cited, by_id[rid].cited_by_count)
        merged = replace(
            canonical,
            referenced_ids=sorted(refs),
            cited_by_count=cited,
        )
        corpus.append(merged)
        member_set = set(members)
        has_doi_edge = any(a in member_set and b in member_set for a, b in doi_edges)
        if has_doi_edge:
            basis, score = "doi", None
        else:
            joining = [s for (a, b), s in dice_edges.items() if a in member_set and b in member_set]
            basis, score = "title-dice", min(joining)
        clusters.append(
            DuplicateCluster(
                canonical_id=merged.id,
                member_ids=sorted(members),
                match_basis=basis,
                dice_score=score,
            )
        )

    pos = {rid: i for i, rid in enumerate(order)}
    corpus.sort(key=lambda r: pos[r.id])
    clusters.sort(key=lambda c: pos[c.canonical_id])
    return corpus, clusters


def merge_new_records(
    corpus: list[PaperRecord],
    new_records: list[PaperRecord],
    threshold: float = DEFAULT_DICE_THRESHOLD,
) -> tuple[list[PaperRecord], list[PaperRecord], list[DuplicateCluster]]:
    """Fold new records into an existing deduplicated corpus.

    Pre-existing records are never replaced or mutated; a new record that
    duplicates an existing one is dropped. Returns (corpus, injected,
    clusters) where injected is the list of genuinely new canonical records.
    """
    existing_ids = {r.id for r in corpus}
    merged, clusters = dedupe(corpus + new_records, threshold, pinned_ids=existing_ids)
    by_id = {r.id for r in corpus}
    out: list[PaperRecord] = []
    injected: list[PaperRecord] = []
    originals = {r.id: r for r in corpus}
    for record in merged:
        if record.id in by_id:
            # Keep the original object untouched; union/max enrichment from a
            # duplicate fetch is discarded in favor of immutability.
            out.append(originals[record.id])
        else:
            out.append(record)
            injected.append(record)
    return out, injected, clusters


# --- ABS ranking -----------------------------------------------------------


def load_rank_table(path: str | Path) -> dict[str, str]:
    """Read a ``journal,rank`` CSV into a normalized lookup table."""
    table: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as handle:
        for row in csv.DictReader(handle):
            journal = (row.get("journal") or "").strip()
            rank = (row.get("rank") or "").strip()
            if not journal:
                continue
            if rank not in ABS_RANKS:
                raise ValueError(f"unknown rank {rank!r} for journal {journal!r}")
            table[normalize_match_text(journal)] = rank
    return table


def assign_ranks(
    corpus: list[PaperRecord],
    table: dict[str, str],
    weights: dict[str, float] | None = None,
) -> list[PaperRecord]:
    """Populate abs_rank, heterodox_flag, and rigor_weight on every record.

    Nothing is excluded: unmatched or venueless records are flagged heterodox
    and kept with the unranked weight.
    """
    weights = dict(DEFAULT_RANK_WEIGHTS if weights is None else weights)
    missing = [r for r in (*ABS_RANKS, "unranked") if r not in weights]
    if missing:
        raise ValueError(f"weights missing entries for {missing}")
    out = []
    for record in corpus:
        if record.source is SourceKind.HETERODOX_REENTRY:
            out.append(
                replace(record, abs_rank=None, heterodox_flag=True, rigor_weight=weights["unranked"])
            )
            continue
        rank = table.get(normalize_match_text(record.venue)) if record.venue else None
        if rank is None:
            out.append(
                replace(record, abs_rank=None, heterodox_flag=True, rigor_weight=weights["unranked"])
            )
        else:
            out.append(
                replace(record, abs_rank=rank, heterodox_flag=False, rigor_weight=weights[rank])
            )
    return out


# --- Citation shadow -------------------------------------------------------


@dataclass
class ShadowAnchor:
    paper_id: str
    citers: int
    influence_score: float

    def to_dict(self) -> dict:
        return {
            "paper_id": self.paper_id,
            "citers": self.citers,
            "influence_score": self.influence_score,
        }


@dataclass
class CitationShadow:
    anchors: list[ShadowAnchor] = field(default_factory=list)
    shadow_edges: list[tuple[str, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "anchors": [a.to_dict() for a in self.anchors],
            "shadow_edges": [list(e) for e in self.shadow_edges],
        }


def _external_keys(record: PaperRecord) -> list[str]:
    keys = []
    _, _, native = record.id.partition(":")
    if native:
        keys.append(native)
    keys.append(record.id)
    d = normalize_doi(record.doi)
    if d:
        keys.append(d)
    return keys


def build_citation_shadow(corpus: list[PaperRecord], anchor_count: int = 10) -> CitationShadow:
    """In-corpus citation edges and the most-cited-within-corpus anchors."""
    lookup: dict[str, str] = {}
    for record in corpus:
        for key in _external_keys(record):
            lookup.setdefault(key, record.id)
    edges: set[tuple[str, str]] = set()
    for record in corpus:
        for ref in record.referenced_ids:
            target = lookup.get(ref) or lookup.get(normalize_doi(ref) or "")
            if target is not None and target != record.id:
                edges.add((record.id, target))
    citers: dict[str, int] = {}
    for _, anchor in edges:
        citers[anchor] = citers.get(anchor, 0) + 1
    by_id = {r.id: r for r in corpus}
    n = len(corpus)

    def anchor_key(pid: str):
        year = by_id[pid].year
        return (-citers[pid], year if year is not None else math.inf, pid)

    ranked = sorted(citers, key=anchor_key)[:anchor_count]
    anchors = [ShadowAnchor(pid, citers[pid], citers[pid] / n) for pid in ranked]
    return CitationShadow(anchors=anchors, shadow_edges=sorted(edges))
