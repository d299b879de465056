from .attention import (
    FusionMode,
    ProjectionNet,
    PromptOrchestrator,
    attention_weights,
    dual_scores,
    fuse,
    stable_softmax,
    write_alpha_trace,
)

__all__ = [
    "FusionMode",
    "ProjectionNet",
    "PromptOrchestrator",
    "attention_weights",
    "dual_scores",
    "fuse",
    "stable_softmax",
    "write_alpha_trace",
]
