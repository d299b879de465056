from .ablation import AblationVariant, apply_variant, parse_variant, sweep_rows, write_sweep
from .evaluate import evaluate, evaluate_factors, run_episode, trace_alphas
from .export import EmbeddingExport, export_embeddings, prompt_separation
from .gap import GapProbeResult, approximation_gap, canonical_views, probe_gap, project_simplex
from .metrics import EpisodeRecord, aggregate, spl_term, summarize
from .splits import DomainSplit, build_split

__all__ = [
    "AblationVariant",
    "DomainSplit",
    "EmbeddingExport",
    "EpisodeRecord",
    "GapProbeResult",
    "aggregate",
    "apply_variant",
    "approximation_gap",
    "build_split",
    "canonical_views",
    "evaluate",
    "evaluate_factors",
    "export_embeddings",
    "parse_variant",
    "probe_gap",
    "project_simplex",
    "prompt_separation",
    "run_episode",
    "spl_term",
    "summarize",
    "sweep_rows",
    "write_sweep",
]
