from dataclasses import dataclass

import numpy as np
import torch

from src.core.encoder.features import EncodedBatch
from src.core.errors import ContractViolationError
from src.core.policy.gae import gae


@dataclass
class Minibatch:
    z_v: torch.Tensor
    z_t: torch.Tensor | None
    z_k: torch.Tensor
    noise: torch.Tensor
    goals: torch.Tensor
    prev_actions: torch.Tensor
    hidden: torch.Tensor
    actions: torch.Tensor
    log_probs: torch.Tensor
    values: torch.Tensor
    advantages: torch.Tensor
    returns: torch.Tensor


class RolloutBuffer:
    """
    Fixed-size (rollout_length x n_envs) store of frozen encoder outputs and PPO records.
    The stored hidden state is the GRU input state of each step, and the stored noise is the
    feature perturbation the rollout added to z_f (zero without feature noise).
    """

    def __init__(
        self, rollout_length: int, n_envs: int, d_out: int, n_domain: int, has_text: bool, hidden: int
    ):
        self.length = rollout_length
        self.n_envs = n_envs
        shape = (rollout_length, n_envs)
        self.z_v = torch.zeros(*shape, d_out)
        self.z_t = torch.zeros(*shape, d_out) if has_text else None
        self.z_k = torch.zeros(*shape, n_domain, d_out)
        self.noise = torch.zeros(*shape, d_out)
        self.goals = torch.zeros(shape, dtype=torch.long)
        self.prev_actions = torch.zeros(shape, dtype=torch.long)
        self.hidden = torch.zeros(*shape, hidden)
        self.actions = torch.zeros(shape, dtype=torch.long)
        self.log_probs = torch.zeros(shape)
        self.values = torch.zeros(shape)
        self.rewards = np.zeros(shape, dtype=np.float64)
        self.dones = np.zeros(shape, dtype=bool)
        self.advantages = np.zeros(shape, dtype=np.float64)
        self.returns = np.zeros(shape, dtype=np.float64)
        self.position = 0

    @property
    def full(self) -> bool:
        return self.position == self.length

    @property
    def size(self) -> int:
        return self.length * self.n_envs

    def reset(self) -> None:
        self.position = 0

    def add(
        self,
        encoded: EncodedBatch,
        goals: torch.Tensor,
        prev_actions: torch.Tensor,
        hidden: torch.Tensor,
        actions: torch.Tensor,
        log_probs: torch.Tensor,
        values: torch.Tensor,
        rewards: np.ndarray,
        dones: np.ndarray,
        noise: torch.Tensor | None = None,
    ) -> None:
        if self.full:
            raise ContractViolationError("rollout buffer is full")
        t = self.position
        self.z_v[t] = encoded.z_v
        if self.z_t is not None:
            self.z_t[t] = encoded.z_t
        self.z_k[t] = encoded.z_k
        self.noise[t] = noise if noise is not None else 0.0
        self.goals[t] = goals
        self.prev_actions[t] = prev_actions
        self.hidden[t] = hidden
        self.actions[t] = actions
        self.log_probs[t] = log_probs
        self.values[t] = values
        self.rewards[t] = rewards
        self.dones[t] = dones
        self.position += 1

    def compute_advantages(self, bootstrap_value: np.ndarray, gamma: float, lam: float) -> None:
        if not self.full:
            raise ContractViolationError("advantages need a full rollout buffer")
        self.advantages, self.returns = gae(
            self.rewards, self.values.numpy().astype(np.float64), self.dones, bootstrap_value, gamma, lam
        )

    def minibatches(self, n_minibatches: int, rng: np.random.Generator, advantages: np.ndarray):
        """Shuffled flat minibatches; `advantages` is the (possibly normalised) advantage table."""
        order = rng.permutation(self.size)

        def flat(tensor: torch.Tensor) -> torch.Tensor:
            return tensor.reshape(self.size, *tensor.shape[2:])

        adv = torch.as_tensor(advantages.reshape(-1), dtype=torch.float32)
        returns = torch.as_tensor(self.returns.reshape(-1), dtype=torch.float32)
        for chunk in np.array_split(order, n_minibatches):
            if len(chunk) == 0:
                continue
            idx = torch.from_numpy(chunk)
            yield Minibatch(
                z_v=flat(self.z_v)[idx],
                z_t=flat(self.z_t)[idx] if self.z_t is not None else None,
                z_k=flat(self.z_k)[idx],
                noise=flat(self.noise)[idx],
                goals=flat(self.goals)[idx],
                prev_actions=flat(self.prev_actions)[idx],
                hidden=flat(self.hidden)[idx],
                actions=flat(self.actions)[idx],
                log_probs=flat(self.log_probs)[idx],
                values=flat(self.values)[idx],
                advantages=adv[idx],
                returns=returns[idx],
            )
