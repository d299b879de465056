import torch
import torch.nn.functional as F

from src.core.encoder.prompt_pool import PromptPool
from src.core.encoder.vit import PromptedViT, frames_to_tensor
from src.core.errors import AugmentorConfigError, ContractViolationError, SamplingError
from src.core.prompt_learning.augment import PhotometricAugmentor, Views
from src.core.prompt_learning.byol import OnlineTargetPair

UNIT_NORM_TOLERANCE = 1e-4


def _check_unit_rows(*batches: torch.Tensor) -> None:
    for batch in batches:
        norms = batch.detach().norm(dim=-1)
        if not torch.allclose(norms, torch.ones_like(norms), atol=UNIT_NORM_TOLERANCE):
            raise ContractViolationError("contrastive inputs must have unit-norm rows")


def infonce_symmetric(z: torch.Tensor, z_pos: torch.Tensor) -> torch.Tensor:
    """InfoNCE with sim(u, v) = exp(u.v), averaged over both directions."""
    if z.shape != z_pos.shape or z.ndim != 2 or len(z) == 0:
        raise ContractViolationError(
            f"InfoNCE needs two equal non-empty (B, d) batches, got {tuple(z.shape)} and {tuple(z_pos.shape)}"
        )
    _check_unit_rows(z, z_pos)
    logits = z @ z_pos.T
    labels = torch.arange(len(z), device=z.device)
    return 0.5 * (F.cross_entropy(logits, labels) + F.cross_entropy(logits.T, labels))


def squared_distance(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    return (a - b).pow(2).sum(dim=-1).mean()


def visual_loss(
    encoder: PromptedViT,
    pool: PromptPool,
    index: int,
    frames: torch.Tensor,
    augmentor: PhotometricAugmentor,
    lambda_v: float,
    generator: torch.Generator | None = None,
) -> torch.Tensor:
    """InfoNCE between frames and their photometric views under one appearance prompt, plus MSE."""
    slot = pool.slots[index]
    foreign = set(augmentor.dimensions) - {slot.name}
    if foreign:
        raise AugmentorConfigError(
            f"augmentor for prompt {slot.name!r} also perturbs {sorted(foreign)}"
        )
    views = augmentor(frames, generator)
    dtype = pool.projection.dtype
    prompt = pool.tokens(index)
    z = encoder(frames_to_tensor(frames, dtype), prompt)
    z_pos = encoder(frames_to_tensor(views, dtype), prompt)
    return infonce_symmetric(z, z_pos) + lambda_v * squared_distance(z, z_pos)


def byol_regression(
    online_q: torch.Tensor, target_k: torch.Tensor, online_k: torch.Tensor, target_q: torch.Tensor
) -> torch.Tensor:
    """Half the sum of both directions of the normalised online -> stop-gradient target MSE."""
    forward = squared_distance(F.normalize(online_q, dim=-1), F.normalize(target_k.detach(), dim=-1))
    backward = squared_distance(F.normalize(online_k, dim=-1), F.normalize(target_q.detach(), dim=-1))
    return 0.5 * (forward + backward)


def check_action_pair(actions_q: torch.Tensor, actions_k: torch.Tensor) -> None:
    if actions_q.shape != actions_k.shape or not torch.equal(actions_q, actions_k):
        raise SamplingError("temporal-action pairs must share the executed action type")


def action_loss(
    encoder: PromptedViT,
    pool: PromptPool,
    index: int,
    views: Views,
    nets: OnlineTargetPair,
) -> torch.Tensor:
    """BYOL-style regression between two augmented frames that executed the same action."""
    check_action_pair(views.actions_q, views.actions_k)
    dtype = pool.projection.dtype
    prompt = pool.tokens(index)
    z_q = encoder(frames_to_tensor(views.query, dtype), prompt)
    z_k = encoder(frames_to_tensor(views.key, dtype), prompt)
    with torch.no_grad():
        target_q = nets.target(z_q)
        target_k = nets.target(z_k)
    return byol_regression(nets.online(z_q), target_k, nets.online(z_k), target_q)


def text_alignment_loss(
    z_tilde: torch.Tensor, goal_anchors: torch.Tensor, lambda_t: float
) -> torch.Tensor:
    """Cross-entropy against the batch's anchor instances plus MSE to the own anchor."""
    logits = z_tilde @ goal_anchors.T
    labels = torch.arange(len(z_tilde), device=z_tilde.device)
    return F.cross_entropy(logits, labels) + lambda_t * squared_distance(z_tilde, goal_anchors)


def text_loss(
    encoder: PromptedViT,
    pool: PromptPool,
    index: int,
    frames: torch.Tensor,
    goals: torch.Tensor,
    anchors: torch.Tensor,
    sigma: float,
    lambda_t: float,
    generator: torch.Generator | None = None,
) -> torch.Tensor:
    """Noise-regularised alignment of text-prompted embeddings with the goal anchors."""
    if sigma < 0:
        raise ContractViolationError(f"sigma must be non-negative, got {sigma}")
    dtype = pool.projection.dtype
    z = encoder(frames_to_tensor(frames, dtype), pool.tokens(index))
    if sigma > 0:
        noise = torch.randn(z.shape, generator=generator, dtype=z.dtype)
        z = z + sigma * noise
    return text_alignment_loss(z, anchors.to(z.dtype)[goals], lambda_t)
