from dataclasses import dataclass

import numpy as np
import torch

from src.core.encoder.prompt_pool import PromptPool
from src.core.encoder.vit import PromptedViT, frames_to_tensor


@dataclass
class EncodedBatch:
    """
    Frozen encoder outputs for one batch of observations.
    Parameters:
    - z_v - vanilla embeddings (B, d_out)
    - z_t - text-prompted embeddings (B, d_out), None without a text prompt
    - z_k - domain-prompted embeddings (B, K', d_out), K' = 0 without prompts
    """

    z_v: torch.Tensor
    z_t: torch.Tensor | None
    z_k: torch.Tensor


class PromptFeatureExtractor:
    """Runs the frozen encoder once per prompt of the pool, without gradients."""

    def __init__(self, encoder: PromptedViT, pool: PromptPool | None = None):
        self.encoder = encoder
        self.pool = pool
        self.d_out = encoder.d_out

    @property
    def n_domain_prompts(self) -> int:
        return 0 if self.pool is None else len(self.pool.domain_indices)

    @property
    def has_text(self) -> bool:
        return self.pool is not None and self.pool.text_index is not None

    @torch.no_grad()
    def __call__(self, frames: np.ndarray | torch.Tensor) -> EncodedBatch:
        images = frames_to_tensor(frames)
        z_v = self.encoder(images)
        if self.pool is None:
            return EncodedBatch(z_v=z_v, z_t=None, z_k=z_v.new_zeros(len(z_v), 0, self.d_out))

        z_k = torch.stack(
            [self.encoder(images, self.pool.tokens(k)) for k in self.pool.domain_indices], dim=1
        )
        text = self.pool.text_index
        z_t = self.encoder(images, self.pool.tokens(text)) if text is not None else None
        return EncodedBatch(z_v=z_v, z_t=z_t, z_k=z_k)
