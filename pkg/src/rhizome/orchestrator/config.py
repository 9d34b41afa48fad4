"""Run configuration: every knob of the seven-phase pipeline in one place."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

from ..agents import ProviderConfig
from ..records import PER_SOURCE_HARD_CAP
from ..resonance import DEFAULT_TRADITIONS


@dataclass
class RunConfig:
    zone: str
    per_source_limit: int = 25
    year_range: tuple[int, int] | None = None
    mailto: str | None = None
    lens_count_range: tuple[int, int] = (3, 5)
    lens_jaccard_max: float = 0.2
    top_m: int | None = 50
    dice_threshold: float = 0.85
    centralization_threshold: float = 0.40
    k_fraction: float = 0.05
    gap_ratio_threshold: float = 2.0
    vocab_jaccard_min: float = 0.30
    min_cluster_size: int = 3
    top_terms_k: int = 20
    traditions: tuple[str, ...] = DEFAULT_TRADITIONS
    max_reentries: int = 2
    reentry_per_source_limit: int = 2
    candidate_pair_cap: int = 200
    edge_batch_size: int = 25
    anchor_count: int = 10
    provider: ProviderConfig = field(
        default_factory=lambda: ProviderConfig(kind="fixture", fixture_path="fixtures")
    )
    api_fixture_dir: str | None = None
    abs_rank_csv: str | None = None
    sidecar_url: str | None = None
    injected_matrix_path: str | None = None
    embed_model: str | None = None
    seed: int = 0
    max_in_flight: int = 8

    def validate(self) -> list[tuple[str, str]]:
        """Field-level problems; empty means the config is runnable."""
        problems: list[tuple[str, str]] = []
        if not self.zone.strip():
            problems.append(("zone", "must be non-empty"))
        if not 0 <= self.per_source_limit <= PER_SOURCE_HARD_CAP:
            problems.append(
                ("per_source_limit", f"must be in [0, {PER_SOURCE_HARD_CAP}]")
            )
        lo, hi = self.lens_count_range
        if not (1 <= lo <= hi):
            problems.append(("lens_count_range", "must satisfy 1 <= low <= high"))
        if not 0 < self.dice_threshold <= 1:
            problems.append(("dice_threshold", "must be in (0, 1]"))
        if not 0 <= self.centralization_threshold <= 1:
            problems.append(("centralization_threshold", "must be in [0, 1]"))
        if not 0 < self.k_fraction <= 1:
            problems.append(("k_fraction", "must be in (0, 1]"))
        if self.gap_ratio_threshold <= 0:
            problems.append(("gap_ratio_threshold", "must be positive"))
        if not 0 <= self.vocab_jaccard_min <= 1:
            problems.append(("vocab_jaccard_min", "must be in [0, 1]"))
        if not 0 <= self.lens_jaccard_max <= 1:
            problems.append(("lens_jaccard_max", "must be in [0, 1]"))
        if self.max_reentries < 0:
            problems.append(("max_reentries", "must be >= 0"))
        if self.top_m is not None and self.top_m < 0:
            problems.append(("top_m", "must be >= 0 or null for whole-corpus"))
        if self.min_cluster_size < 2:
            problems.append(("min_cluster_size", "must be >= 2"))
        if self.edge_batch_size < 1:
            problems.append(("edge_batch_size", "must be >= 1"))
        if self.max_in_flight < 1:
            problems.append(("max_in_flight", "must be >= 1"))
        problems.extend(("provider", p) for p in self.provider.validate())
        return problems

    def agent_roster(self, lens_names: list[str] | None = None) -> list[str]:
        """The declared specialist roster; informational, not enforced."""
        roster = [
            "epistemology",
            "researcher:open-alex",
            "researcher:arxiv",
            "deduplication",
            "abs-evaluator",
            "citation-mapper",
            "resonance-detector",
            "rupture-protocol",
            "assemblage-builder",
            "rhizome-builder",
        ]
        for name in lens_names or []:
            roster.append(f"lens-reader:{name}")
        return roster

    def to_dict(self) -> dict:
        return {
            "zone": self.zone,
            "per_source_limit": self.per_source_limit,
            "year_range": list(self.year_range) if self.year_range else None,
            "lens_count_range": list(self.lens_count_range),
            "lens_jaccard_max": self.lens_jaccard_max,
            "top_m": self.top_m,
            "dice_threshold": self.dice_threshold,
            "centralization_threshold": self.centralization_threshold,
            "k_fraction": self.k_fraction,
            "gap_ratio_threshold": self.gap_ratio_threshold,
            "vocab_jaccard_min": self.vocab_jaccard_min,
            "min_cluster_size": self.min_cluster_size,
            "top_terms_k": self.top_terms_k,
            "traditions": list(self.traditions),
            "max_reentries": self.max_reentries,
            "reentry_per_source_limit": self.reentry_per_source_limit,
            "candidate_pair_cap": self.candidate_pair_cap,
            "edge_batch_size": self.edge_batch_size,
            "anchor_count": self.anchor_count,
            "provider_kind": self.provider.kind,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        kwargs = {}
        for key, value in data.items():
            if key not in known:
                raise ValueError(f"unknown config field {key!r}")
            kwargs[key] = value
        if "provider" in kwargs and isinstance(kwargs["provider"], dict):
            kwargs["provider"] = ProviderConfig(**kwargs["provider"])
        for tuple_field in ("year_range", "lens_count_range", "traditions"):
            if kwargs.get(tuple_field) is not None and not isinstance(kwargs[tuple_field], tuple):
                kwargs[tuple_field] = tuple(kwargs[tuple_field])
        if "zone" not in kwargs:
            raise ValueError("config requires a zone")
        return cls(**kwargs)

    def with_overrides(self, **kwargs) -> "RunConfig":
        return replace(self, **kwargs)
