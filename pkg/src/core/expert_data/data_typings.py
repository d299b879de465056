from dataclasses import dataclass, field
from typing import Any
from typing_extensions import Self

import numpy as np

from src.core.consts import N_CATEGORIES
from src.core.envsim.sim_typings import AgentState, DomainFactor, GridScene


@dataclass
class Trajectory:
    """
    One expert episode under a single domain factor.
    Parameters:
    - factor_id - index of the factor in the manifest
    - goal - category id
    - scene_index - index of the scene in the manifest
    - start - initial agent pose
    - actions, rewards, dones - per-step records, length T
    - frames - uint8 array (T, 3, H, W), the observation before each action
    - presences - uint8 array (T, 12), ground-truth visibility per frame
    """

    factor_id: int
    goal: int
    scene_index: int
    start: AgentState
    actions: np.ndarray
    rewards: np.ndarray
    dones: np.ndarray
    frames: np.ndarray
    presences: np.ndarray

    @property
    def length(self) -> int:
        return len(self.actions)

    @property
    def presence(self) -> np.ndarray:
        """Presence vector of the initial observation."""
        return self.presences[0]

    def record(self) -> dict[str, Any]:
        """Manifest entry without the frame blob."""
        return {
            "factor": self.factor_id,
            "goal": self.goal,
            "scene": self.scene_index,
            "length": self.length,
            "start": self.start.to_dict(),
            "actions": self.actions.tolist(),
            "rewards": self.rewards.tolist(),
            "dones": self.dones.astype(int).tolist(),
            "presences": self.presences.astype(int).tolist(),
        }

    @classmethod
    def from_record(cls, record: dict[str, Any], frames: np.ndarray) -> Self:
        return cls(
            factor_id=int(record["factor"]),
            goal=int(record["goal"]),
            scene_index=int(record["scene"]),
            start=AgentState.from_dict(record["start"]),
            actions=np.asarray(record["actions"], dtype=np.int64),
            rewards=np.asarray(record["rewards"], dtype=np.float64),
            dones=np.asarray(record["dones"], dtype=bool),
            frames=frames,
            presences=np.asarray(record["presences"], dtype=np.uint8).reshape(-1, N_CATEGORIES),
        )


@dataclass(frozen=True)
class AlignmentPair:
    """Base trajectory aligned with its best same-goal match under another factor."""

    base_index: int
    factor_id: int
    other_index: int
    f1: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "base_index": self.base_index,
            "factor": self.factor_id,
            "other_index": self.other_index,
            "f1": self.f1,
        }


@dataclass
class DatasetManifest:
    """
    Dataset D = union of per-factor trajectory lists D_i plus alignment pairs.
    The base factor is factor 0.
    """

    factors: list[DomainFactor]
    scenes: list[GridScene]
    trajectories: dict[int, list[Trajectory]]
    pairs: list[AlignmentPair] = field(default_factory=list)
    kappa: float = 0.7

    @property
    def counts(self) -> dict[str, int]:
        n_trajectories = sum(len(items) for items in self.trajectories.values())
        n_samples = sum(t.length for items in self.trajectories.values() for t in items)
        return {
            "trajectories": n_trajectories,
            "samples": n_samples,
            "pairs": len(self.pairs),
        }

    def all_trajectories(self) -> list[Trajectory]:
        return [t for factor_id in sorted(self.trajectories) for t in self.trajectories[factor_id]]

    def frame_table(self) -> "FrameTable":
        """Flatten every stored frame with its metadata."""
        trajectories = self.all_trajectories()
        if not trajectories:
            return FrameTable.empty()
        frames = np.concatenate([t.frames for t in trajectories])
        return FrameTable(
            frames=frames,
            factor_ids=np.concatenate([np.full(t.length, t.factor_id) for t in trajectories]),
            actions=np.concatenate([t.actions for t in trajectories]),
            goals=np.concatenate([np.full(t.length, t.goal) for t in trajectories]),
            trajectory_ids=np.concatenate(
                [np.full(t.length, i) for i, t in enumerate(trajectories)]
            ),
            timesteps=np.concatenate([np.arange(t.length) for t in trajectories]),
            presences=np.concatenate([t.presences for t in trajectories]),
        )


@dataclass
class FrameTable:
    frames: np.ndarray
    factor_ids: np.ndarray
    actions: np.ndarray
    goals: np.ndarray
    trajectory_ids: np.ndarray
    timesteps: np.ndarray
    presences: np.ndarray

    def __len__(self) -> int:
        return len(self.frames)

    def subset(self, indices: np.ndarray) -> Self:
        return FrameTable(
            frames=self.frames[indices],
            factor_ids=self.factor_ids[indices],
            actions=self.actions[indices],
            goals=self.goals[indices],
            trajectory_ids=self.trajectory_ids[indices],
            timesteps=self.timesteps[indices],
            presences=self.presences[indices],
        )

    @classmethod
    def empty(cls) -> Self:
        empty = np.zeros(0, dtype=np.int64)
        return cls(
            frames=np.zeros((0, 3, 0, 0), dtype=np.uint8),
            factor_ids=empty,
            actions=empty,
            goals=empty,
            trajectory_ids=empty,
            timesteps=empty,
            presences=np.zeros((0, N_CATEGORIES), dtype=np.uint8),
        )
