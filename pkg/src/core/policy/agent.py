from dataclasses import dataclass

import numpy as np
import torch

from src.core.encoder.features import EncodedBatch, PromptFeatureExtractor
from src.core.orchestrator.attention import PromptOrchestrator
from src.core.policy.recurrent import ActOutput, RecurrentActorCritic, act


@dataclass
class AgentStep:
    encoded: EncodedBatch
    output: ActOutput
    alpha: torch.Tensor
    hidden_in: torch.Tensor
    prev_actions: torch.Tensor
    noise: torch.Tensor | None = None


class NavigationPolicy:
    """
    Frozen feature extractor + orchestrator + recurrent core acting on a batch of environments.
    Keeps per-environment hidden states and previous actions.
    """

    def __init__(
        self,
        extractor: PromptFeatureExtractor,
        orchestrator: PromptOrchestrator,
        core: RecurrentActorCritic,
    ):
        self.extractor = extractor
        self.orchestrator = orchestrator
        self.core = core
        self.hidden = core.initial_state(0)
        self.prev_actions = torch.zeros(0, dtype=torch.long)

    def reset(self, n_envs: int) -> None:
        self.hidden = self.core.initial_state(n_envs)
        self.prev_actions = torch.full((n_envs,), -1, dtype=torch.long)

    def reset_env(self, index: int) -> None:
        self.hidden[index] = 0.0
        self.prev_actions[index] = -1

    @torch.no_grad()
    def step(
        self,
        frames: np.ndarray,
        goals: np.ndarray,
        deterministic: bool = False,
        generator: torch.Generator | None = None,
        feature_noise: float = 0.0,
    ) -> AgentStep:
        encoded = self.extractor(frames)
        z_f, alpha = self.orchestrator(encoded.z_v, encoded.z_t, encoded.z_k)
        noise = None
        if feature_noise > 0:
            noise = feature_noise * torch.randn(z_f.shape, generator=generator)
            z_f = z_f + noise
        hidden_in, prev_actions = self.hidden.clone(), self.prev_actions.clone()
        output = act(
            self.core,
            z_f,
            torch.as_tensor(goals, dtype=torch.long),
            prev_actions,
            hidden_in,
            deterministic=deterministic,
            generator=generator,
        )
        self.hidden = output.hidden
        self.prev_actions = output.action.clone()
        return AgentStep(encoded, output, alpha, hidden_in, prev_actions, noise)

    @torch.no_grad()
    def value(self, frames: np.ndarray, goals: np.ndarray) -> np.ndarray:
        """Critic estimate for the current observations without advancing the hidden state."""
        encoded = self.extractor(frames)
        z_f, _ = self.orchestrator(encoded.z_v, encoded.z_t, encoded.z_k)
        _, value, _ = self.core(
            z_f, torch.as_tensor(goals, dtype=torch.long), self.prev_actions, self.hidden
        )
        return value.numpy().astype(np.float64)
