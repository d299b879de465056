import math
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np
import torch
import torch.nn as nn

from src.core.errors import ContractViolationError
from src.core.logs import write_csv


class FusionMode(Enum):
    """
    How the domain-prompted embeddings are weighted.
    Variants:
    - dual - softmax of learnable attention score times cosine score
    - average - uniform weights 1/K'
    - attention_only - softmax of the attention score
    - cosine_only - softmax of the cosine score
    - vanilla - no prompts at all, z_f = z_v
    """

    dual = "dual"
    average = "average"
    attention_only = "attention_only"
    cosine_only = "cosine_only"
    vanilla = "vanilla"


class ProjectionNet(nn.Module):
    """f_p: two linear layers with SiLU in between, d_out -> hidden -> d_out."""

    def __init__(self, d_out: int = 32, hidden: int = 128):
        super().__init__()
        self.net = nn.Sequential(nn.Linear(d_out, hidden), nn.SiLU(), nn.Linear(hidden, d_out))
        for module in self.net:
            if isinstance(module, nn.Linear):
                nn.init.xavier_uniform_(module.weight)
                nn.init.zeros_(module.bias)

    def forward(self, z: torch.Tensor) -> torch.Tensor:
        return self.net(z)


def dual_scores(
    z_v: torch.Tensor, z_k: torch.Tensor, f_p: nn.Module
) -> tuple[torch.Tensor, torch.Tensor]:
    """
    z_v (B, d), z_k (B, K', d) -> s_a, s_c of shape (B, K').
    s_a = z_v . f_p(z_k) / sqrt(d); s_c = z_v . z_k.
    """
    if z_k.ndim != 3 or z_v.ndim != 2 or z_v.shape[-1] != z_k.shape[-1] or z_v.shape[0] != z_k.shape[0]:
        raise ContractViolationError(
            f"embedding shapes do not match: z_v {tuple(z_v.shape)}, z_k {tuple(z_k.shape)}"
        )
    d = z_v.shape[-1]
    anchor = z_v.unsqueeze(1)
    s_a = (anchor * f_p(z_k)).sum(dim=-1) / math.sqrt(d)
    s_c = (anchor * z_k).sum(dim=-1)
    return s_a, s_c


def stable_softmax(scores: torch.Tensor) -> torch.Tensor:
    shifted = scores - scores.max(dim=-1, keepdim=True).values
    weights = shifted.exp()
    return weights / weights.sum(dim=-1, keepdim=True)


def attention_weights(s_a: torch.Tensor, s_c: torch.Tensor, mode: FusionMode = FusionMode.dual) -> torch.Tensor:
    match mode:
        case FusionMode.dual:
            return stable_softmax(s_a * s_c)
        case FusionMode.attention_only:
            return stable_softmax(s_a)
        case FusionMode.cosine_only:
            return stable_softmax(s_c)
        case FusionMode.average:
            return torch.full_like(s_c, 1.0 / s_c.shape[-1])
    raise ContractViolationError(f"fusion mode {mode} has no attention weights")


def fuse(
    z_v: torch.Tensor,
    z_t: torch.Tensor | None,
    z_k: torch.Tensor,
    s_a: torch.Tensor,
    s_c: torch.Tensor,
    mode: FusionMode = FusionMode.dual,
) -> tuple[torch.Tensor, torch.Tensor]:
    """z_f = z_v + z_t + sum_k alpha_k z_k, not re-normalised. z_t bypasses the attention."""
    if z_k.shape[1] < 1:
        raise ContractViolationError("fusion needs at least one domain-prompted embedding")
    alpha = attention_weights(s_a, s_c, mode)
    z_f = z_v + (alpha.unsqueeze(-1) * z_k).sum(dim=1)
    if z_t is not None:
        z_f = z_f + z_t
    return z_f, alpha


class PromptOrchestrator(nn.Module):
    """Observation-conditioned convex weighting of prompt embeddings; only f_p is learnable."""

    def __init__(self, d_out: int = 32, hidden: int = 128, mode: FusionMode = FusionMode.dual):
        super().__init__()
        self.mode = FusionMode(mode)
        self.d_out = d_out
        self.projection = ProjectionNet(d_out, hidden)

    def forward(
        self, z_v: torch.Tensor, z_t: torch.Tensor | None, z_k: torch.Tensor
    ) -> tuple[torch.Tensor, torch.Tensor]:
        if self.mode == FusionMode.vanilla or z_k.shape[1] == 0:
            return z_v, z_v.new_zeros(z_v.shape[0], 0)
        s_a, s_c = dual_scores(z_v, z_k, self.projection)
        return fuse(z_v, z_t, z_k, s_a, s_c, self.mode)


def write_alpha_trace(
    path: Path | str, alphas: np.ndarray, prompt_names: Sequence[str], config_digest: str | None = None
) -> Path:
    """CSV with one row per step: step, then one column per domain prompt."""
    alphas = np.asarray(alphas)
    header = ["step", *[f"alpha_{name}" for name in prompt_names]]
    rows = ([step, *map(float, row)] for step, row in enumerate(alphas))
    return write_csv(path, header, rows, config_digest)
