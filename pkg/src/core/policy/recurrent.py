from dataclasses import dataclass

import torch
import torch.nn as nn
import torch.nn.functional as F

from src.core.consts import N_ACTIONS, N_CATEGORIES


@dataclass
class ActOutput:
    action: torch.Tensor
    log_prob: torch.Tensor
    value: torch.Tensor
    hidden: torch.Tensor


class RecurrentActorCritic(nn.Module):
    """
    GRU actor-critic over [z_f; one-hot goal; previous-action embedding].
    Previous action -1 (episode start) maps to the padding row, a fixed zero vector.
    """

    def __init__(self, d_out: int = 32, hidden: int = 128, action_embedding: int = 16):
        super().__init__()
        self.d_out = d_out
        self.hidden_size = hidden
        self.start_token = N_ACTIONS
        self.action_embedding = nn.Embedding(N_ACTIONS + 1, action_embedding, padding_idx=N_ACTIONS)
        self.input_size = d_out + N_CATEGORIES + action_embedding
        self.gru = nn.GRUCell(self.input_size, hidden)
        self.actor = nn.Linear(hidden, N_ACTIONS)
        self.critic = nn.Linear(hidden, 1)

    def initial_state(self, batch: int) -> torch.Tensor:
        return torch.zeros(batch, self.hidden_size)

    def policy_input(
        self, z_f: torch.Tensor, goals: torch.Tensor, prev_actions: torch.Tensor
    ) -> torch.Tensor:
        tokens = torch.where(prev_actions < 0, torch.full_like(prev_actions, self.start_token), prev_actions)
        goal = F.one_hot(goals.long(), N_CATEGORIES).to(z_f.dtype)
        return torch.cat([z_f, goal, self.action_embedding(tokens.long())], dim=-1)

    def forward(
        self, z_f: torch.Tensor, goals: torch.Tensor, prev_actions: torch.Tensor, hidden: torch.Tensor
    ) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """-> (logits (B, 6), value (B,), next hidden (B, H))."""
        hidden = self.gru(self.policy_input(z_f, goals, prev_actions), hidden)
        return self.actor(hidden), self.critic(hidden).squeeze(-1), hidden


def act(
    core: RecurrentActorCritic,
    z_f: torch.Tensor,
    goals: torch.Tensor,
    prev_actions: torch.Tensor,
    hidden: torch.Tensor,
    deterministic: bool = False,
    generator: torch.Generator | None = None,
) -> ActOutput:
    logits, value, hidden = core(z_f, goals, prev_actions, hidden)
    log_probs = F.log_softmax(logits, dim=-1)
    if deterministic:
        action = logits.argmax(dim=-1)
    else:
        action = torch.multinomial(log_probs.exp(), 1, generator=generator).squeeze(-1)
    return ActOutput(
        action=action,
        log_prob=log_probs.gather(-1, action.unsqueeze(-1)).squeeze(-1),
        value=value,
        hidden=hidden,
    )
