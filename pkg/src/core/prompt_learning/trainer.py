import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F
from tqdm import tqdm

from src.core.config import LossConfig, PromptsConfig
from src.core.encoder.prompt_pool import PromptPool, PromptRole
from src.core.encoder.vit import PromptedViT, frames_to_tensor
from src.core.errors import ContractViolationError, TrainingDivergedError
from src.core.expert_data.data_typings import DatasetManifest
from src.core.logs import JsonlWriter
from src.core.prompt_learning.augment import (
    ActionPairSampler,
    PairAugmentation,
    PhotometricAugmentor,
    Views,
    alignment_groups,
)
from src.core.prompt_learning.byol import OnlineTargetPair
from src.core.prompt_learning.losses import action_loss, text_loss, visual_loss
from src.core.seeding import keyed_generator, keyed_seed

BRANCHES = ("visual", "action", "text")


@dataclass
class PromptTrainingReport:
    """
    Outcome of contrastive prompt learning.
    Parameters:
    - pool - trained prompt pool
    - nets - online/target projector pair of the action branch
    - call_counts - number of loss evaluations per branch
    - last_losses - last finite loss per branch
    - iterations - optimisation iterations run
    """

    pool: PromptPool
    nets: OnlineTargetPair
    call_counts: dict[str, int] = field(default_factory=lambda: {b: 0 for b in BRANCHES})
    last_losses: dict[str, float] = field(default_factory=dict)
    iterations: int = 0


def _sgd(params: list, lr: float, config: LossConfig, nesterov: bool = False) -> torch.optim.SGD:
    return torch.optim.SGD(
        params, lr=lr, momentum=config.momentum, weight_decay=config.weight_decay, nesterov=nesterov
    )


def iterations_per_epoch(n_frames: int, config: LossConfig) -> int:
    if config.iterations_per_epoch is not None:
        return config.iterations_per_epoch
    return max(1, math.ceil(n_frames / config.visual_batch))


@torch.no_grad()
def augmentation_alignment(
    encoder: PromptedViT,
    pool: PromptPool,
    index: int,
    frames: torch.Tensor,
    augmentor: PhotometricAugmentor,
    generator: torch.Generator | None = None,
) -> float:
    """Mean cosine between frames and their photometric views under prompt `index`."""
    views = augmentor(frames, generator)
    prompt = pool.tokens(index)
    z = encoder(frames_to_tensor(frames), prompt)
    z_pos = encoder(frames_to_tensor(views), prompt)
    return float(F.cosine_similarity(z, z_pos, dim=-1).mean())


def train_prompts(
    manifest: DatasetManifest,
    encoder: PromptedViT,
    prompts_config: PromptsConfig,
    loss_config: LossConfig,
    anchors: np.ndarray,
    seed: int,
    log_path: Path | str | None = None,
    show_progress: bool = True,
    config_digest: str | None = None,
) -> PromptTrainingReport:
    """
    Interleaved visual, temporal-action and text branches, each stepping only its own prompts.
    The encoder must be frozen; it is never handed to an optimizer.
    """
    if not encoder.frozen:
        raise ContractViolationError("prompt learning requires a frozen encoder")
    table = manifest.frame_table()
    if len(table) == 0:
        raise ContractViolationError("cannot train prompts on an empty dataset")

    torch.manual_seed(seed)
    pool = PromptPool.from_layout(
        prompts_config.n_prompts,
        prompts_config.length,
        prompts_config.prompt_dim,
        encoder.hidden,
        seed,
        with_text=prompts_config.use_text,
    )
    nets = OnlineTargetPair(d_out=encoder.d_out)
    report = PromptTrainingReport(pool=pool, nets=nets)

    appearance = pool.indices(PromptRole.appearance) if prompts_config.use_visual else []
    actions = pool.indices(PromptRole.action) if prompts_config.use_action else []
    text = pool.indices(PromptRole.text) if prompts_config.use_text else []

    optimizers: dict[str, torch.optim.Optimizer] = {}
    if appearance:
        params = [p for k in appearance for p in pool.prompt_parameters(k)]
        optimizers["visual"] = _sgd(params, loss_config.lr_visual, loss_config)
    if actions:
        params = [p for k in actions for p in pool.prompt_parameters(k)] + nets.online_parameters()
        optimizers["action"] = _sgd(params, loss_config.lr_action, loss_config)
    if text:
        params = [p for k in text for p in pool.prompt_parameters(k)]
        optimizers["text"] = _sgd(params, loss_config.lr_text, loss_config, nesterov=True)

    per_epoch = iterations_per_epoch(len(table), loss_config)
    total = loss_config.epochs * per_epoch
    schedulers = {
        name: torch.optim.lr_scheduler.PolynomialLR(
            optimizer, total_iters=total, power=loss_config.poly_power
        )
        for name, optimizer in optimizers.items()
    }

    augmentors = {k: PhotometricAugmentor.for_slot(pool.slots[k]) for k in appearance}
    sampler = ActionPairSampler(table, manifest.factors, alignment_groups(manifest)) if actions else None
    pair_augmentation = PairAugmentation(encoder.image_size, loss_config.crop_scale, loss_config.jitter)
    anchor_table = torch.as_tensor(np.asarray(anchors), dtype=torch.float32)
    rng = np.random.default_rng([seed, 2])
    frames = torch.from_numpy(table.frames)

    def batch_indices(size: int) -> np.ndarray:
        return rng.choice(len(table), size=min(size, len(table)), replace=False)

    def branch_losses(branch: str, epoch: int, batch: int) -> list[torch.Tensor]:
        if branch == "visual":
            idx = batch_indices(loss_config.visual_batch)
            return [
                visual_loss(
                    encoder, pool, k, frames[idx], augmentors[k], loss_config.lambda_v,
                    generator=keyed_generator(seed, epoch, batch, k),
                )
                for k in appearance
            ]
        if branch == "action":
            losses = []
            for k in actions:
                q, p = sampler.sample(pool.slots[k], max(2, loss_config.action_batch), rng)
                views = Views(
                    query=pair_augmentation(frames[q], keyed_seed(seed, epoch, batch, k, 0)),
                    key=pair_augmentation(frames[p], keyed_seed(seed, epoch, batch, k, 1)),
                    actions_q=torch.from_numpy(table.actions[q]),
                    actions_k=torch.from_numpy(table.actions[p]),
                )
                losses.append(action_loss(encoder, pool, k, views, nets))
            return losses
        idx = batch_indices(loss_config.text_batch)
        return [
            text_loss(
                encoder, pool, k, frames[idx], torch.from_numpy(table.goals[idx]).long(),
                anchor_table, loss_config.sigma, loss_config.lambda_t,
                generator=keyed_generator(seed, epoch, batch, k),
            )
            for k in text
        ]

    logging.info(
        f"Prompt training: {len(pool)} prompts, branches {sorted(optimizers)}, {total} iterations"
    )
    nets.train()
    with JsonlWriter(log_path, config_digest) as writer:
        for step in tqdm(range(total), desc="prompts", disable=not show_progress):
            epoch, batch = divmod(step, per_epoch)
            for branch in BRANCHES:
                if branch not in optimizers:
                    continue
                optimizer = optimizers[branch]
                lr = optimizer.param_groups[0]["lr"]
                losses = branch_losses(branch, epoch, batch)
                report.call_counts[branch] += len(losses)
                loss = torch.stack(losses).sum()
                if not torch.isfinite(loss):
                    raise TrainingDivergedError(
                        f"{branch} loss is {loss.item()} at epoch {epoch}, step {step}, lr {lr:.3g};"
                        f" last finite loss {report.last_losses.get(branch)}"
                    )
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
                schedulers[branch].step()
                if branch == "action":
                    nets.update_target(loss_config.beta)
                report.last_losses[branch] = loss.item()
                writer.write({"step": step, "branch": branch, "loss": loss.item(), "lr": lr})
            report.iterations = step + 1

    logging.info(f"Prompt training finished: last losses {report.last_losses}")
    return report
