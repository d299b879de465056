from .features import EncodedBatch, PromptFeatureExtractor
from .pretrain import build_encoder, pretrain_backbone
from .prompt_pool import PromptPool, PromptRole, PromptSlot, prompt_layout
from .text_anchors import text_anchor, text_anchor_table
from .vit import PromptedViT, encode, frames_to_tensor

__all__ = [
    "EncodedBatch",
    "PromptFeatureExtractor",
    "PromptPool",
    "PromptRole",
    "PromptSlot",
    "PromptedViT",
    "build_encoder",
    "encode",
    "frames_to_tensor",
    "pretrain_backbone",
    "prompt_layout",
    "text_anchor",
    "text_anchor_table",
]
