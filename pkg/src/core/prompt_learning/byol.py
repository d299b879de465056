import copy
from typing import Iterable

import torch
import torch.nn as nn

from src.core.errors import ContractViolationError


def mlp(in_dim: int, hidden: int, out_dim: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Linear(in_dim, hidden),
        nn.BatchNorm1d(hidden),
        nn.ReLU(inplace=True),
        nn.Linear(hidden, out_dim),
    )


@torch.no_grad()
def momentum_update(
    target: Iterable[torch.Tensor], online: Iterable[torch.Tensor], beta: float
) -> None:
    """In place: target <- beta * target + (1 - beta) * online."""
    target, online = list(target), list(online)
    if len(target) != len(online):
        raise ContractViolationError(
            f"momentum update over {len(target)} target and {len(online)} online tensors"
        )
    for nu, omega in zip(target, online):
        if nu.shape != omega.shape:
            raise ContractViolationError(
                f"momentum update shape mismatch: {tuple(nu.shape)} vs {tuple(omega.shape)}"
            )
        nu.mul_(beta).add_(omega, alpha=1.0 - beta)


class OnlineTargetPair(nn.Module):
    """
    Online projector and predictor with a momentum target projector.
    The target never receives gradients; it moves only through update_target.
    """

    def __init__(self, d_out: int = 32, hidden: int = 128, bottleneck: int = 16):
        super().__init__()
        self.projector = mlp(d_out, hidden, bottleneck)
        self.predictor = mlp(bottleneck, hidden, bottleneck)
        self.target_projector = copy.deepcopy(self.projector)
        self.target_projector.requires_grad_(False)

    def online(self, z: torch.Tensor) -> torch.Tensor:
        return self.predictor(self.projector(z))

    def target(self, z: torch.Tensor) -> torch.Tensor:
        with torch.no_grad():
            return self.target_projector(z)

    def online_parameters(self) -> list[nn.Parameter]:
        return [*self.projector.parameters(), *self.predictor.parameters()]

    def update_target(self, beta: float) -> None:
        momentum_update(self.target_projector.parameters(), self.projector.parameters(), beta)
