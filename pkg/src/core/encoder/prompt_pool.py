from dataclasses import dataclass
from enum import Enum
from typing import Any
from typing_extensions import Self

import torch
import torch.nn as nn

from src.core.checkpoint import module_checksum
from src.core.consts import Action
from src.core.envsim.sim_typings import DomainFactor, FovGroup
from src.core.errors import ContractViolationError

MIN_PROMPTS = 2
MAX_PROMPTS = 12


class PromptRole(Enum):
    """
    What a prompt is trained to capture.
    Variants:
    - appearance - one photometric dimension, trained by the visual branch
    - action - one embodiment attribute, trained by the temporal-action branch
    - text - goal semantics, trained against the text anchors
    """

    appearance = "appearance"
    action = "action"
    text = "text"


@dataclass(frozen=True)
class PromptSlot:
    """
    Role assignment of one prompt of the pool.
    Parameters:
    - name - unique slot name
    - role - training branch that owns the prompt
    - fov_groups - FOV bins whose frames qualify as action queries (action slots only)
    - actions - executed actions whose frames qualify as action queries (action slots only)
    """

    name: str
    role: PromptRole
    fov_groups: tuple[FovGroup, ...] = ()
    actions: tuple[Action, ...] = ()

    def accepts(self, factor: DomainFactor, action: int) -> bool:
        if self.fov_groups and factor.fov_group not in self.fov_groups:
            return False
        return not self.actions or Action(action) in self.actions

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "role": self.role.value}


APPEARANCE_SLOTS = (
    PromptSlot("brightness", PromptRole.appearance),
    PromptSlot("contrast", PromptRole.appearance),
    PromptSlot("saturation", PromptRole.appearance),
    PromptSlot("hue", PromptRole.appearance),
)
ACTION_SLOTS = (
    PromptSlot("fov_narrow", PromptRole.action, fov_groups=(FovGroup.narrow,)),
    PromptSlot("fov_standard", PromptRole.action, fov_groups=(FovGroup.standard,)),
    PromptSlot("fov_wide", PromptRole.action, fov_groups=(FovGroup.wide,)),
    PromptSlot(
        "rotation", PromptRole.action, actions=(Action.RotateLeft, Action.RotateRight)
    ),
    PromptSlot(
        "look_step",
        PromptRole.action,
        actions=(Action.MoveAhead, Action.LookUp, Action.LookDown),
    ),
)
FOV_BOUNDARY_SLOTS = (
    PromptSlot(
        "fov_narrow_standard", PromptRole.action, fov_groups=(FovGroup.narrow, FovGroup.standard)
    ),
    PromptSlot(
        "fov_standard_wide", PromptRole.action, fov_groups=(FovGroup.standard, FovGroup.wide)
    ),
)
TEXT_SLOT = PromptSlot("text", PromptRole.text)
SLOTS_BY_NAME = {
    slot.name: slot
    for slot in APPEARANCE_SLOTS + ACTION_SLOTS + FOV_BOUNDARY_SLOTS + (TEXT_SLOT,)
}


def slots_from_names(names: list[str]) -> tuple[PromptSlot, ...]:
    try:
        return tuple(SLOTS_BY_NAME[name] for name in names)
    except KeyError as error:
        raise ContractViolationError(f"unknown prompt slot {error.args[0]!r}") from error


def prompt_layout(n_prompts: int = 10, with_text: bool = True) -> tuple[PromptSlot, ...]:
    """
    Slot table for a pool of n_prompts.
    Up to ten prompts, appearance and action slots are taken round-robin next to the text slot;
    eleven and twelve subdivide the FOV bins at their boundaries.
    Ordering is always appearance, action, text. Without text the domain slots are unchanged.
    """
    if not MIN_PROMPTS <= n_prompts <= MAX_PROMPTS:
        raise ContractViolationError(
            f"prompt pool size must lie in [{MIN_PROMPTS}, {MAX_PROMPTS}], got {n_prompts}"
        )
    n_domain = n_prompts - 1

    appearance, action = [], []
    queue_a, queue_b = list(APPEARANCE_SLOTS), list(ACTION_SLOTS) + list(FOV_BOUNDARY_SLOTS)
    while len(appearance) + len(action) < n_domain:
        if queue_a and (len(appearance) <= len(action) or not queue_b):
            appearance.append(queue_a.pop(0))
        else:
            action.append(queue_b.pop(0))

    slots = tuple(appearance) + tuple(action)
    return slots + (TEXT_SLOT,) if with_text else slots


class PromptPool(nn.Module):
    """
    K prompts of L x D learnable vectors, each with L learnable positional vectors of width d.
    The shared projection W_p (D x d) is a fixed Xavier-initialised buffer.
    """

    def __init__(
        self,
        slots: tuple[PromptSlot, ...],
        length: int = 8,
        prompt_dim: int = 64,
        hidden: int = 64,
        seed: int = 0,
    ):
        super().__init__()
        if len({slot.name for slot in slots}) != len(slots):
            raise ContractViolationError("prompt slot names must be unique")
        self.slots = tuple(slots)
        self.length = length
        self.prompt_dim = prompt_dim
        self.hidden = hidden

        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(seed)
            projection = torch.empty(prompt_dim, hidden)
            nn.init.xavier_uniform_(projection)
            self.register_buffer("projection", projection)
            self.prompts = nn.ParameterList()
            self.positions = nn.ParameterList()
            for _ in self.slots:
                prompt = torch.empty(length, prompt_dim)
                nn.init.xavier_uniform_(prompt)
                position = torch.empty(length, hidden)
                nn.init.trunc_normal_(position, std=0.02)
                self.prompts.append(nn.Parameter(prompt))
                self.positions.append(nn.Parameter(position))

    def __len__(self) -> int:
        return len(self.slots)

    @classmethod
    def from_layout(
        cls, n_prompts: int, length: int, prompt_dim: int, hidden: int, seed: int, with_text: bool = True
    ) -> Self:
        return cls(prompt_layout(n_prompts, with_text), length, prompt_dim, hidden, seed)

    def tokens(self, index: int) -> torch.Tensor:
        """Projected prompt block W_p(p^k) + positional vectors, shape (L, d)."""
        return self.prompts[index] @ self.projection + self.positions[index]

    def prompt_parameters(self, index: int) -> list[nn.Parameter]:
        return [self.prompts[index], self.positions[index]]

    def indices(self, role: PromptRole) -> list[int]:
        return [i for i, slot in enumerate(self.slots) if slot.role == role]

    @property
    def domain_indices(self) -> list[int]:
        """Prompts fused by the orchestrator: everything except the text prompt."""
        return [i for i, slot in enumerate(self.slots) if slot.role != PromptRole.text]

    @property
    def text_index(self) -> int | None:
        text = self.indices(PromptRole.text)
        return text[0] if text else None

    def index_of(self, name: str) -> int:
        for i, slot in enumerate(self.slots):
            if slot.name == name:
                return i
        raise KeyError(name)

    def layout(self) -> list[dict[str, Any]]:
        return [slot.to_dict() for slot in self.slots]

    @property
    def names(self) -> list[str]:
        return [slot.name for slot in self.slots]

    def checksum(self) -> str:
        return module_checksum(self)
