import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from src.core.checkpoint import module_checksum
from src.core.consts import IMAGE_SIZE
from src.core.errors import EncoderShapeError


def frames_to_tensor(frames: np.ndarray | torch.Tensor, dtype: torch.dtype = torch.float32) -> torch.Tensor:
    """uint8 (B, 3, H, W) or (3, H, W) frames -> float tensor in [0, 1]."""
    tensor = torch.as_tensor(frames)
    if tensor.ndim == 3:
        tensor = tensor.unsqueeze(0)
    if tensor.dtype == torch.uint8:
        return tensor.to(dtype) / 255.0
    return tensor.to(dtype)


class PromptedViT(nn.Module):
    """
    Compact vision transformer accepting an optional prompt token block.
    Token sequence: [x_cls + pos_0; prompt tokens; patches + pos_1..N_p].
    Output: class token -> LayerNorm -> W_proj -> l2 normalisation.
    """

    def __init__(
        self,
        image_size: int = IMAGE_SIZE,
        patch_size: int = 8,
        hidden: int = 64,
        layers: int = 4,
        heads: int = 4,
        d_out: int = 32,
    ):
        super().__init__()
        if image_size % patch_size != 0:
            raise EncoderShapeError(f"image size {image_size} is not divisible by patch {patch_size}")
        self.image_size = image_size
        self.patch_size = patch_size
        self.hidden = hidden
        self.d_out = d_out
        self.n_patches = (image_size // patch_size) ** 2

        self.patch_embed = nn.Conv2d(3, hidden, kernel_size=patch_size, stride=patch_size)
        self.cls_token = nn.Parameter(torch.zeros(1, 1, hidden))
        self.pos_embed = nn.Parameter(torch.zeros(1, self.n_patches + 1, hidden))
        layer = nn.TransformerEncoderLayer(
            d_model=hidden,
            nhead=heads,
            dim_feedforward=4 * hidden,
            dropout=0.0,
            activation="gelu",
            batch_first=True,
            norm_first=True,
        )
        self.blocks = nn.TransformerEncoder(layer, num_layers=layers, enable_nested_tensor=False)
        self.norm = nn.LayerNorm(hidden)
        self.proj = nn.Linear(hidden, d_out, bias=False)

        nn.init.trunc_normal_(self.pos_embed, std=0.02)
        nn.init.trunc_normal_(self.cls_token, std=0.02)
        self._frozen = False

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self) -> "PromptedViT":
        self.requires_grad_(False)
        self.eval()
        self._frozen = True
        return self

    def train(self, mode: bool = True) -> "PromptedViT":
        # A frozen backbone stays in eval mode whatever the caller asks for.
        return super().train(mode and not getattr(self, "_frozen", False))

    def _check_input(self, images: torch.Tensor) -> None:
        expected = (3, self.image_size, self.image_size)
        if images.ndim != 4 or tuple(images.shape[1:]) != expected:
            raise EncoderShapeError(
                f"expected observations of shape (B, {expected[0]}, {expected[1]}, {expected[2]}),"
                f" got {tuple(images.shape)}"
            )

    def tokens(self, images: torch.Tensor, prompt: torch.Tensor | None = None) -> torch.Tensor:
        self._check_input(images)
        batch = images.shape[0]
        patches = self.patch_embed(images).flatten(2).transpose(1, 2)
        cls = (self.cls_token + self.pos_embed[:, :1]).expand(batch, -1, -1)
        patches = patches + self.pos_embed[:, 1:]
        if prompt is None:
            return torch.cat([cls, patches], dim=1)
        if prompt.ndim == 2:
            prompt = prompt.unsqueeze(0)
        if prompt.shape[-1] != self.hidden:
            raise EncoderShapeError(
                f"prompt tokens must have width {self.hidden}, got {prompt.shape[-1]}"
            )
        return torch.cat([cls, prompt.expand(batch, -1, -1), patches], dim=1)

    def class_features(self, images: torch.Tensor, prompt: torch.Tensor | None = None) -> torch.Tensor:
        """Class-token output after the final LayerNorm, shape (B, hidden)."""
        return self.norm(self.blocks(self.tokens(images, prompt))[:, 0])

    def forward(self, images: torch.Tensor, prompt: torch.Tensor | None = None) -> torch.Tensor:
        return F.normalize(self.proj(self.class_features(images, prompt)), dim=-1)

    def checksum(self) -> str:
        return module_checksum(self)


def encode(
    encoder: PromptedViT,
    observations: np.ndarray | torch.Tensor,
    prompt: torch.Tensor | None = None,
) -> torch.Tensor:
    """Embed a batch of observations, optionally steered by projected prompt tokens."""
    reference = next(encoder.parameters())
    images = frames_to_tensor(observations, dtype=reference.dtype).to(reference.device)
    return encoder(images, prompt)
