from dataclasses import dataclass, field, fields
from typing import Any

from src.core.phases.phase_typings import ArtifactName


@dataclass
class PhaseParameters:
    required_artifacts: list[ArtifactName]
    output_artifacts: list[ArtifactName]
    logging_info: tuple[str | None, str | None] = (None, None)

    def to_dict(self) -> dict[str, Any]:
        return {field.name: getattr(self, field.name) for field in fields(self)}


@dataclass
class CollectParameters(PhaseParameters):
    pass


@dataclass
class PretrainParameters(PhaseParameters):
    pass


@dataclass
class PromptsParameters(PhaseParameters):
    check_frozen: bool = True


@dataclass
class PolicyParameters(PhaseParameters):
    """Prompts are only required when the fusion mode uses them."""

    prompt_artifacts: list[ArtifactName] = field(default_factory=lambda: ["prompts"])
    check_frozen: bool = True


@dataclass
class EvaluateParameters(PhaseParameters):
    prompt_artifacts: list[ArtifactName] = field(default_factory=lambda: ["prompts"])
    trace_alphas: bool = True


@dataclass
class ProbeParameters(PhaseParameters):
    pass


@dataclass
class ExportParameters(PhaseParameters):
    pass


@dataclass
class AblateParameters(PhaseParameters):
    """None takes the variants and seeds of the run config."""

    variants: list[str] | None = None
    seeds: list[int] | None = None


PHASE_PARAMETERS: dict[str, PhaseParameters] = {
    "collect": CollectParameters(
        required_artifacts=[],
        output_artifacts=["dataset", "split"],
        logging_info=("Collecting expert trajectories", "Expert dataset and domain split saved"),
    ),
    "pretrain-backbone": PretrainParameters(
        required_artifacts=["dataset"],
        output_artifacts=["encoder"],
        logging_info=("Pretraining the backbone", "Backbone frozen and saved"),
    ),
    "train-prompts": PromptsParameters(
        required_artifacts=["dataset", "encoder"],
        output_artifacts=["prompts", "prompt_log"],
        logging_info=("Contrastive prompt learning started", "Prompt pool saved"),
    ),
    "train-policy": PolicyParameters(
        required_artifacts=["encoder", "split", "dataset"],
        output_artifacts=["policy", "reward_curve", "policy_log"],
        logging_info=("Policy training started", "Policy saved"),
    ),
    "evaluate": EvaluateParameters(
        required_artifacts=["encoder", "split", "dataset", "policy"],
        output_artifacts=["metrics", "alpha_trace"],
        logging_info=("Evaluation started", "Metrics saved"),
    ),
    "probe-gap": ProbeParameters(
        required_artifacts=["dataset", "encoder", "prompts"],
        output_artifacts=["gap", "gap_samples"],
        logging_info=("Approximation-gap probe started", "Gap probe saved"),
    ),
    "export": ExportParameters(
        required_artifacts=["dataset", "encoder", "prompts"],
        output_artifacts=["embeddings", "separation"],
        logging_info=("Embedding export started", "Embeddings exported"),
    ),
    "ablate": AblateParameters(
        required_artifacts=[],
        output_artifacts=["ablation"],
        logging_info=("Ablation sweep started", "Ablation sweep saved"),
    ),
}
COMMANDS = tuple(PHASE_PARAMETERS)
