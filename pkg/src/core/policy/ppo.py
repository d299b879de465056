from dataclasses import dataclass

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from src.core.config import PPOConfig
from src.core.errors import TrainingDivergedError
from src.core.orchestrator.attention import PromptOrchestrator
from src.core.policy.buffer import RolloutBuffer
from src.core.policy.gae import normalize_advantages
from src.core.policy.recurrent import RecurrentActorCritic


@dataclass
class PPOReport:
    policy_loss: float
    value_loss: float
    entropy: float
    approx_kl: float
    clip_fraction: float


def clipped_surrogate(ratio: torch.Tensor, advantages: torch.Tensor, clip: float) -> torch.Tensor:
    """Per-sample -min(r A, clip(r, 1 - eps, 1 + eps) A)."""
    return -torch.min(ratio * advantages, ratio.clamp(1.0 - clip, 1.0 + clip) * advantages)


def ppo_update(
    buffer: RolloutBuffer,
    core: RecurrentActorCritic,
    orchestrator: PromptOrchestrator,
    optimizer: torch.optim.Optimizer,
    config: PPOConfig,
    rng: np.random.Generator,
) -> PPOReport:
    """
    Clipped-surrogate PPO over a full buffer. Stored hidden states and feature noise are
    replayed; the orchestrator re-fuses the stored frozen embeddings so f_p receives gradients.
    """
    advantages = normalize_advantages(buffer.advantages)
    parameters = [*core.parameters(), *orchestrator.parameters()]
    totals = {"policy": 0.0, "value": 0.0, "entropy": 0.0, "kl": 0.0, "clipped": 0.0}
    n_batches = 0
    for epoch in range(config.epochs):
        for batch in buffer.minibatches(config.minibatches, rng, advantages):
            z_f, _ = orchestrator(batch.z_v, batch.z_t, batch.z_k)
            z_f = z_f + batch.noise
            logits, values, _ = core(z_f, batch.goals, batch.prev_actions, batch.hidden)
            log_probs = F.log_softmax(logits, dim=-1)
            new_log_prob = log_probs.gather(-1, batch.actions.unsqueeze(-1)).squeeze(-1)
            entropy = -(log_probs.exp() * log_probs).sum(dim=-1).mean()
            ratio = (new_log_prob - batch.log_probs).exp()

            policy_loss = clipped_surrogate(ratio, batch.advantages, config.clip).mean()
            value_loss = F.mse_loss(values, batch.returns)
            loss = policy_loss + config.value_coef * value_loss - config.entropy_coef * entropy
            if not torch.isfinite(loss):
                raise TrainingDivergedError(
                    f"PPO loss is {loss.item()} at epoch {epoch}, batch {n_batches};"
                    f" policy {policy_loss.item()}, value {value_loss.item()}"
                )

            optimizer.zero_grad()
            loss.backward()
            nn.utils.clip_grad_norm_(parameters, config.max_grad_norm)
            optimizer.step()

            with torch.no_grad():
                totals["policy"] += policy_loss.item()
                totals["value"] += value_loss.item()
                totals["entropy"] += entropy.item()
                totals["kl"] += (batch.log_probs - new_log_prob).mean().item()
                totals["clipped"] += ((ratio - 1.0).abs() > config.clip).float().mean().item()
            n_batches += 1

    n_batches = max(n_batches, 1)
    return PPOReport(
        policy_loss=totals["policy"] / n_batches,
        value_loss=totals["value"] / n_batches,
        entropy=totals["entropy"] / n_batches,
        approx_kl=totals["kl"] / n_batches,
        clip_fraction=totals["clipped"] / n_batches,
    )
