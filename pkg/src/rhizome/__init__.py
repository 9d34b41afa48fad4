"""Rhizomatic literature-analysis pipeline.

Seven phases: lens generation, dual-source corpus ingestion, parallel
per-lens reading, resonance and rupture detection, relational synthesis,
cartographic output, and semantic topography.
"""

from .agents import (
    AgentCall,
    AgentFailure,
    AgentResponse,
    AgentRuntime,
    ProviderConfig,
    SchemaRegistry,
    TokenUsage,
    aggregate_metrics,
)
from .integrity import (
    CitationShadow,
    DuplicateCluster,
    assign_ranks,
    build_citation_shadow,
    dedupe,
    dice,
    load_rank_table,
    normalize_doi,
)
from .lenses import (
    LensReading,
    TheoreticalLens,
    generate_lenses,
    prefilter_signals,
    read_corpus,
)
from .records import FetchQuery, FetchReport, PaperRecord, SourceKind
from .resonance import (
    CentralizationReport,
    ConvergentAnomaly,
    RuptureEvent,
    centralization_risk,
    detect_anomalies,
    heterodox_reentry,
)
from .synthesis import (
    Assemblage,
    KnowledgeGraph,
    RelationEdge,
    build_assemblages,
    build_cartography,
    candidate_pairs,
    canonical_form,
    validate_cartography,
)
from .topography import (
    EmbeddingMatrix,
    TopographyMap,
    build_topography,
    detect_isolations,
    detect_voids,
    marginalization,
    top_terms,
)

__version__ = "0.1.0"

__all__ = [
    "AgentCall",
    "AgentFailure",
    "AgentResponse",
    "AgentRuntime",
    "Assemblage",
    "CentralizationReport",
    "CitationShadow",
    "ConvergentAnomaly",
    "DuplicateCluster",
    "EmbeddingMatrix",
    "FetchQuery",
    "FetchReport",
    "KnowledgeGraph",
    "LensReading",
    "PaperRecord",
    "ProviderConfig",
    "RelationEdge",
    "RuptureEvent",
    "SchemaRegistry",
    "SourceKind",
    "TheoreticalLens",
    "TokenUsage",
    "TopographyMap",
    "aggregate_metrics",
    "assign_ranks",
    "build_assemblages",
    "build_cartography",
    "build_citation_shadow",
    "build_topography",
    "candidate_pairs",
    "canonical_form",
    "centralization_risk",
    "dedupe",
    "detect_anomalies",
    "detect_isolations",
    "detect_voids",
    "dice",
    "generate_lenses",
    "heterodox_reentry",
    "load_rank_table",
    "marginalization",
    "normalize_doi",
    "prefilter_signals",
    "read_corpus",
    "top_terms",
    "validate_cartography",
]
