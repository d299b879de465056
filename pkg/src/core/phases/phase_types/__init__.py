from .ablate_phase import AblatePhase, run_ablation
from .collect_phase import CollectPhase
from .evaluate_phase import EvaluatePhase
from .export_phase import ExportPhase
from .policy_phase import PolicyPhase
from .pretrain_phase import PretrainPhase
from .probe_phase import ProbePhase
from .prompts_phase import PromptsPhase

__all__ = [
    "AblatePhase",
    "CollectPhase",
    "EvaluatePhase",
    "ExportPhase",
    "PolicyPhase",
    "PretrainPhase",
    "ProbePhase",
    "PromptsPhase",
    "run_ablation",
]
