from dataclasses import dataclass
from typing import Sequence

import numpy as np
import torch
from torchvision.transforms import v2

from src.core.consts import N_ACTIONS
from src.core.envsim.photometric import apply_photometric
from src.core.envsim.sim_typings import (
    BRIGHTNESS_RANGE,
    CONTRAST_RANGE,
    HUE_RANGE,
    SATURATION_RANGE,
    DomainFactor,
    Observation,
)
from src.core.encoder.prompt_pool import PromptSlot
from src.core.errors import AugmentorConfigError, SamplingError
from src.core.expert_data.data_typings import DatasetManifest, FrameTable

DIMENSIONS = {
    "brightness": ("brightness", BRIGHTNESS_RANGE),
    "contrast": ("contrast", CONTRAST_RANGE),
    "saturation": ("saturation", SATURATION_RANGE),
    "hue": ("hue_shift", HUE_RANGE),
}


class PhotometricAugmentor:
    """Resamples the listed photometric dimensions uniformly over their ranges; the rest stay identity."""

    def __init__(self, dimensions: Sequence[str] = ()):
        unknown = sorted(set(dimensions) - set(DIMENSIONS))
        if unknown:
            raise AugmentorConfigError(f"unknown photometric dimensions {unknown}")
        self.dimensions = tuple(dimensions)

    @classmethod
    def for_slot(cls, slot: PromptSlot) -> "PhotometricAugmentor":
        if slot.name not in DIMENSIONS:
            raise AugmentorConfigError(f"prompt {slot.name!r} owns no photometric dimension")
        return cls((slot.name,))

    def __call__(self, frames: torch.Tensor, generator: torch.Generator | None = None) -> torch.Tensor:
        if not self.dimensions:
            return frames.clone()
        draws = torch.rand((len(frames), len(self.dimensions)), generator=generator, dtype=torch.float64)
        views = []
        for frame, row in zip(frames.numpy(), draws.numpy()):
            kwargs = {}
            for name, u in zip(self.dimensions, row):
                key, (low, high) = DIMENSIONS[name]
                kwargs[key] = float(low + u * (high - low))
            views.append(apply_photometric(Observation(frame), **kwargs).rgb)
        return torch.from_numpy(np.stack(views))


@dataclass
class Views:
    """Two augmented frame batches that executed the same actions."""

    query: torch.Tensor
    key: torch.Tensor
    actions_q: torch.Tensor
    actions_k: torch.Tensor


class PairAugmentation:
    """Per-sample random resized crop (scale within crop_scale) and colour jitter."""

    def __init__(self, image_size: int, crop_scale: float = 0.1, jitter: float = 0.1):
        self.transform = v2.Compose(
            [
                v2.RandomResizedCrop(
                    image_size, scale=(1.0 - crop_scale, 1.0), ratio=(1.0 - crop_scale, 1.0 + crop_scale)
                ),
                v2.ColorJitter(brightness=jitter, contrast=jitter, saturation=jitter, hue=jitter),
            ]
        )

    def __call__(self, frames: torch.Tensor, seed: int) -> torch.Tensor:
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(seed)
            return torch.stack([self.transform(frame) for frame in frames])


def alignment_groups(manifest: DatasetManifest) -> np.ndarray:
    """
    Group id per trajectory (frame-table order): a base trajectory and its aligned
    matches share one group; unaligned trajectories get -1.
    """
    offsets, offset = {}, 0
    for factor_id in sorted(manifest.trajectories):
        offsets[factor_id] = offset
        offset += len(manifest.trajectories[factor_id])
    groups = np.full(offset, -1, dtype=np.int64)
    if not manifest.trajectories:
        return groups
    base = min(manifest.trajectories)
    for pair in manifest.pairs:
        base_id = offsets[base] + pair.base_index
        groups[base_id] = pair.base_index
        groups[offsets[pair.factor_id] + pair.other_index] = pair.base_index
    return groups


class ActionPairSampler:
    """
    Uniform sampling over qualifying (query, key) frame pairs with equal executed action.
    Tiers, first non-empty wins: aligned trajectories under another factor, any trajectory
    under another factor, any other frame of the same action.
    """

    def __init__(self, table: FrameTable, factors: Sequence[DomainFactor], groups: np.ndarray | None = None):
        self.table = table
        self.factors = list(factors)
        traj_groups = groups if groups is not None else np.full(
            int(table.trajectory_ids.max(initial=-1)) + 1, -1
        )
        frame_groups = traj_groups[table.trajectory_ids] if len(table) else np.zeros(0, dtype=np.int64)
        actions = table.actions.astype(np.int64)
        grouped = np.where(frame_groups >= 0, frame_groups * N_ACTIONS + actions, -1)
        self._tiers = [
            ("aligned", grouped, True),
            ("cross_factor", actions, True),
            ("same_action", actions, False),
        ]
        self._members: dict[tuple[str, int, int], np.ndarray] = {}
        self._weights: dict[tuple[str, str], tuple[np.ndarray, np.ndarray]] = {}

    def _counts(self, keys: np.ndarray, cross: bool, candidates: np.ndarray) -> np.ndarray:
        valid = keys >= 0
        key_ids, key_count = np.unique(keys[valid], return_counts=True)
        lookup = dict(zip(key_ids.tolist(), key_count.tolist()))
        total = np.array([lookup.get(int(k), 0) if k >= 0 else 0 for k in keys[candidates]])
        if not cross:
            return np.maximum(total - 1, 0)
        factor_keys = keys * len(self.factors) + self.table.factor_ids
        fk_ids, fk_count = np.unique(factor_keys[valid], return_counts=True)
        fk_lookup = dict(zip(fk_ids.tolist(), fk_count.tolist()))
        same = np.array(
            [fk_lookup.get(int(fk), 0) if k >= 0 else 0 for k, fk in zip(keys[candidates], factor_keys[candidates])]
        )
        return total - same

    def _partners(self, tier: str, keys: np.ndarray, cross: bool, query: int) -> np.ndarray:
        factor = int(self.table.factor_ids[query])
        cache_key = (tier, int(keys[query]), factor if cross else -1)
        if cache_key not in self._members:
            mask = keys == keys[query]
            if cross:
                mask &= self.table.factor_ids != factor
            self._members[cache_key] = np.flatnonzero(mask)
        members = self._members[cache_key]
        return members if cross else members[members != query]

    def query_candidates(self, slot: PromptSlot) -> np.ndarray:
        eligible = np.array(
            [
                slot.accepts(self.factors[int(f)], int(a))
                for f, a in zip(self.table.factor_ids, self.table.actions)
            ],
            dtype=bool,
        )
        return np.flatnonzero(eligible) if eligible.any() else np.arange(len(self.table))

    def sample(
        self, slot: PromptSlot, batch_size: int, rng: np.random.Generator
    ) -> tuple[np.ndarray, np.ndarray]:
        for tier, keys, cross in self._tiers:
            if (slot.name, tier) not in self._weights:
                candidates = self.query_candidates(slot)
                weights = self._counts(keys, cross, candidates).astype(np.float64)
                self._weights[(slot.name, tier)] = (candidates, weights)
            candidates, weights = self._weights[(slot.name, tier)]
            if weights.sum() <= 0:
                continue
            queries = rng.choice(candidates, size=batch_size, p=weights / weights.sum())
            partners = np.array(
                [rng.choice(self._partners(tier, keys, cross, int(q))) for q in queries]
            )
            return queries, partners
        raise SamplingError(f"no frame pair with equal executed action for prompt {slot.name!r}")
