from .agent import NavigationPolicy
from .buffer import RolloutBuffer
from .gae import gae, normalize_advantages
from .ppo import PPOReport, clipped_surrogate, ppo_update
from .recurrent import ActOutput, RecurrentActorCritic, act
from .trainer import PolicyTrainingReport, merge_reward_curves, train_policy

__all__ = [
    "ActOutput",
    "NavigationPolicy",
    "PPOReport",
    "PolicyTrainingReport",
    "RecurrentActorCritic",
    "RolloutBuffer",
    "act",
    "clipped_surrogate",
    "gae",
    "merge_reward_curves",
    "normalize_advantages",
    "ppo_update",
    "train_policy",
]
