import logging

import numpy as np
import torch
import torch.nn as nn
from tqdm import tqdm

from src.core.config import EncoderConfig
from src.core.consts import N_CATEGORIES
from src.core.encoder.vit import PromptedViT, frames_to_tensor
from src.core.errors import ContractViolationError, TrainingDivergedError
from src.core.expert_data.data_typings import FrameTable


def build_encoder(config: EncoderConfig, image_size: int) -> PromptedViT:
    return PromptedViT(
        image_size=image_size,
        patch_size=config.patch_size,
        hidden=config.hidden,
        layers=config.layers,
        heads=config.heads,
        d_out=config.d_out,
    )


def presence_accuracy(
    encoder: PromptedViT, head: nn.Linear, frames: np.ndarray, labels: np.ndarray, batch_size: int
) -> float:
    """Per-bit accuracy of the multi-label presence head."""
    if len(frames) == 0:
        return float("nan")
    correct = 0
    with torch.no_grad():
        for start in range(0, len(frames), batch_size):
            images = frames_to_tensor(frames[start : start + batch_size])
            logits = head(encoder.class_features(images))
            predicted = (logits > 0).numpy().astype(np.uint8)
            correct += int(np.sum(predicted == labels[start : start + batch_size]))
    return correct / labels.size


def pretrain_backbone(
    table: FrameTable,
    config: EncoderConfig,
    seed: int,
    image_size: int,
    show_progress: bool = True,
) -> tuple[PromptedViT, float]:
    """
    Train the encoder without prompts to predict each frame's presence vector through a
    temporary linear head on the class token, then discard the head and freeze everything.
    Returns the frozen encoder and the head's per-bit accuracy on held-out frames.
    """
    if len(table) == 0:
        raise ContractViolationError("cannot pretrain the backbone on an empty dataset")

    torch.manual_seed(seed)
    rng = np.random.default_rng([seed, 1])
    encoder = build_encoder(config, image_size)
    head = nn.Linear(config.hidden, N_CATEGORIES)

    order = rng.permutation(len(table))
    n_holdout = int(len(order) * config.holdout_fraction) if len(order) > 1 else 0
    holdout, train = order[:n_holdout], order[n_holdout:]
    labels = table.presences.astype(np.float32)

    optimizer = torch.optim.Adam([*encoder.parameters(), *head.parameters()], lr=config.pretrain_lr)
    criterion = nn.BCEWithLogitsLoss()
    encoder.train()
    for epoch in tqdm(range(config.pretrain_epochs), desc="pretrain", disable=not show_progress):
        permutation = rng.permutation(train)
        epoch_loss = 0.0
        for start in range(0, len(permutation), config.pretrain_batch_size):
            batch = permutation[start : start + config.pretrain_batch_size]
            images = frames_to_tensor(table.frames[batch])
            logits = head(encoder.class_features(images))
            loss = criterion(logits, torch.from_numpy(labels[batch]))
            if not torch.isfinite(loss):
                raise TrainingDivergedError(
                    f"backbone pretraining diverged at epoch {epoch}, batch offset {start}"
                )
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_loss += loss.item() * len(batch)
        logging.debug(f"Pretrain epoch {epoch}: loss {epoch_loss / max(len(train), 1):.4f}")

    encoder.eval()
    accuracy = presence_accuracy(
        encoder,
        head,
        table.frames[holdout],
        table.presences[holdout].astype(np.uint8),
        config.pretrain_batch_size,
    )
    logging.info(f"Backbone pretrained: held-out presence accuracy {accuracy:.4f}")
    return encoder.freeze(), accuracy
