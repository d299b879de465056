from .collection import align_trajectories, collect_and_align, replay_states, replay_trajectory
from .data_typings import AlignmentPair, DatasetManifest, FrameTable, Trajectory
from .expert import expert_policy
from .presence import f1_score, presence_vector
from .storage import load_dataset, load_scenes, save_dataset

__all__ = [
    "AlignmentPair",
    "DatasetManifest",
    "FrameTable",
    "Trajectory",
    "align_trajectories",
    "collect_and_align",
    "expert_policy",
    "f1_score",
    "load_dataset",
    "load_scenes",
    "presence_vector",
    "replay_states",
    "replay_trajectory",
    "save_dataset",
]
