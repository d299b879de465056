from .augment import ActionPairSampler, PairAugmentation, PhotometricAugmentor, Views
from .byol import OnlineTargetPair, momentum_update
from .losses import action_loss, byol_regression, infonce_symmetric, text_loss, visual_loss
from .trainer import PromptTrainingReport, augmentation_alignment, train_prompts

__all__ = [
    "ActionPairSampler",
    "OnlineTargetPair",
    "PairAugmentation",
    "PhotometricAugmentor",
    "PromptTrainingReport",
    "Views",
    "action_loss",
    "augmentation_alignment",
    "byol_regression",
    "infonce_symmetric",
    "momentum_update",
    "text_loss",
    "train_prompts",
    "visual_loss",
]
