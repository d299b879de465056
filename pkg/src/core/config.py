import hashlib
import json
from pathlib import Path
from typing import Any, Literal
from typing_extensions import Self

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.core.consts import CONFIGS_DIR, DATA_DIR, IMAGE_SIZE, T_MAX
from src.core.errors import ConfigError

FusionName = Literal["dual", "average", "attention_only", "cosine_only", "vanilla"]


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class EnvConfig(Section):
    """
    Scene pool and episode horizon.
    Parameters:
    - n_scenes - number of generated scenes shared by every phase
    - scene_size - grid side in cells
    - n_wall_segments - interior wall segments per scene
    - duplicates - extra object instances per scene
    - image_size - rendered frame side in pixels
    - max_steps - episode horizon, at most T_max
    """

    n_scenes: int = Field(4, ge=1)
    scene_size: int = Field(12, ge=6)
    n_wall_segments: int = Field(3, ge=0)
    duplicates: int = Field(0, ge=0)
    image_size: int = Field(IMAGE_SIZE, ge=8)
    max_steps: int = Field(T_MAX, ge=1, le=T_MAX)


class SplitConfig(Section):
    n_source: int = Field(3, ge=1)
    n_seen: int = Field(6, ge=0)
    n_unseen: int = Field(4, ge=1)
    factor_seed: int = 7
    source: list[dict[str, Any]] | None = None
    seen: list[dict[str, Any]] | None = None
    unseen: list[dict[str, Any]] | None = None


class CollectConfig(Section):
    n_per_factor: int = Field(50, ge=1)
    kappa: float = Field(0.7, gt=0.0, le=1.0)
    shared_starts: bool = False
    n_workers: int = Field(1, ge=1)


class EncoderConfig(Section):
    patch_size: int = 8
    hidden: int = 64
    layers: int = Field(4, ge=1)
    heads: int = Field(4, ge=1)
    d_out: int = Field(32, ge=12)
    pretrain_epochs: int = Field(50, ge=1)
    pretrain_batch_size: int = Field(64, ge=2)
    pretrain_lr: float = Field(1e-3, gt=0.0)
    holdout_fraction: float = Field(0.1, gt=0.0, lt=1.0)
    anchor_seed: int = 0


class PromptsConfig(Section):
    n_prompts: int = Field(10, ge=2, le=12)
    length: int = Field(8, ge=1)
    prompt_dim: int = Field(64, ge=1)
    use_visual: bool = True
    use_action: bool = True
    use_text: bool = True


class LossConfig(Section):
    """
    Contrastive prompt-learning hyper-parameters.
    Parameters:
    - lambda_v, lambda_t - weights of the MSE alignment terms
    - sigma - std of the Gaussian noise added to text-prompted embeddings
    - beta - momentum of the BYOL target update
    - *_batch - minibatch sizes per branch
    - epochs, iterations_per_epoch - training length (None -> frames / visual_batch)
    - lr_* - base learning rates of the three SGD optimizers
    """

    lambda_v: float = Field(1.0, ge=0.0)
    lambda_t: float = Field(1.0, ge=0.0)
    sigma: float = Field(0.1, ge=0.0)
    beta: float = Field(0.99, ge=0.0, le=1.0)
    visual_batch: int = Field(64, ge=1)
    action_batch: int = Field(32, ge=1)
    text_batch: int = Field(64, ge=1)
    epochs: int = Field(100, ge=1)
    iterations_per_epoch: int | None = Field(None, ge=1)
    lr_visual: float = Field(1e-3, gt=0.0)
    lr_action: float = Field(1e-3, gt=0.0)
    lr_text: float = Field(2e-3, gt=0.0)
    momentum: float = Field(0.9, ge=0.0, lt=1.0)
    weight_decay: float = Field(1e-3, ge=0.0)
    poly_power: float = Field(0.9, gt=0.0)
    crop_scale: float = Field(0.1, ge=0.0, lt=0.5)
    jitter: float = Field(0.1, ge=0.0, lt=1.0)


class OrchestratorConfig(Section):
    fusion: FusionName = "dual"
    hidden: int = Field(128, ge=1)


class PPOConfig(Section):
    clip: float = Field(0.2, gt=0.0, lt=1.0)
    gamma: float = Field(0.99, ge=0.0, le=1.0)
    gae_lambda: float = Field(0.95, ge=0.0, le=1.0)
    value_coef: float = Field(0.5, ge=0.0)
    entropy_coef: float = Field(0.01, ge=0.0)
    lr: float = Field(3e-4, gt=0.0)
    lr_final: float = Field(1e-5, ge=0.0)
    n_envs: int = Field(8, ge=1)
    rollout_length: int = Field(100, ge=1)
    total_steps: int = Field(300_000, ge=1)
    epochs: int = Field(4, ge=1)
    minibatches: int = Field(4, ge=1)
    max_grad_norm: float = Field(0.5, gt=0.0)
    hidden: int = Field(128, ge=1)
    action_embedding: int = Field(16, ge=1)
    feature_noise: float = Field(0.0, ge=0.0)
    curve_window: int = Field(20_000, ge=1)


class EvaluationConfig(Section):
    episodes_per_domain: int = Field(20, ge=1)
    n_eval_seeds: int = Field(3, ge=1)
    splits: list[Literal["source", "seen", "unseen"]] = ["source", "seen", "unseen"]


class AblationConfig(Section):
    variants: list[str] = ["full", "avg-fusion", "w/o-text"]
    seeds: list[int] = [0, 1, 2]


class ProbeConfig(Section):
    """
    Approximation-gap probe.
    Parameters:
    - n_samples - frames probed
    - max_iter, tol - projected-gradient iteration cap and iterate-movement tolerance
    - step - fixed step size; None uses 0.1 / K'
    - lipschitz_step - with step unset, use 1 / L of the least-squares objective instead
    """

    n_samples: int = Field(100, ge=1)
    max_iter: int = Field(1000, ge=1)
    tol: float = Field(1e-10, gt=0.0)
    step: float | None = Field(None, gt=0.0)
    lipschitz_step: bool = False


class ExportConfig(Section):
    n_samples: int = Field(50, ge=1)
    alpha_trace_steps: int = Field(200, ge=1)


class RunConfig(Section):
    """Everything a run needs; reproducible from (RunConfig, code version)."""

    seed: int = 0
    out_dir: str = str(DATA_DIR / "run")
    env: EnvConfig = Field(default_factory=EnvConfig)
    split: SplitConfig = Field(default_factory=SplitConfig)
    collect: CollectConfig = Field(default_factory=CollectConfig)
    encoder: EncoderConfig = Field(default_factory=EncoderConfig)
    prompts: PromptsConfig = Field(default_factory=PromptsConfig)
    loss: LossConfig = Field(default_factory=LossConfig)
    orchestrator: OrchestratorConfig = Field(default_factory=OrchestratorConfig)
    ppo: PPOConfig = Field(default_factory=PPOConfig)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    ablation: AblationConfig = Field(default_factory=AblationConfig)
    probe: ProbeConfig = Field(default_factory=ProbeConfig)
    export: ExportConfig = Field(default_factory=ExportConfig)

    @field_validator("out_dir")
    @classmethod
    def _non_empty(cls, value: str) -> str:
        if not value:
            raise ValueError("out_dir must not be empty")
        return value

    @model_validator(mode="after")
    def _check_encoder(self) -> Self:
        if self.env.image_size % self.encoder.patch_size != 0:
            raise ValueError("env.image_size must be divisible by encoder.patch_size")
        if self.encoder.hidden % self.encoder.heads != 0:
            raise ValueError("encoder.hidden must be divisible by encoder.heads")
        return self

    @property
    def out_path(self) -> Path:
        return Path(self.out_dir)


def parse_override(item: str) -> tuple[list[str], Any]:
    """'a.b.c=value' -> (['a', 'b', 'c'], value); value parsed as JSON, else kept as string."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form key=value")
    key, raw = item.split("=", 1)
    path = [part for part in key.strip().split(".") if part]
    if not path:
        raise ConfigError(f"override {item!r} has an empty key")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return path, value


def apply_overrides(data: dict[str, Any], overrides: list[str]) -> dict[str, Any]:
    for item in overrides:
        path, value = parse_override(item)
        node = data
        for part in path[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"override {item!r} descends into non-object key {part!r}")
            node = child
        node[path[-1]] = value
    return data


def load_config(
    path: Path | str | None = None,
    overrides: list[str] | None = None,
    seed: int | None = None,
    out_dir: str | None = None,
) -> RunConfig:
    """Read a JSON config (default: configs/default.json) and apply CLI overrides."""
    path = Path(path) if path is not None else CONFIGS_DIR / "default.json"
    try:
        with path.open("r", encoding="utf-8") as file:
            data = json.load(file)
    except FileNotFoundError as error:
        raise ConfigError(f"config file {path} does not exist") from error
    except json.JSONDecodeError as error:
        raise ConfigError(f"config file {path} is not valid JSON: {error}") from error

    data = apply_overrides(data, overrides or [])
    if seed is not None:
        data["seed"] = seed
    if out_dir is not None:
        data["out_dir"] = out_dir
    try:
        return RunConfig.model_validate(data)
    except ValidationError as error:
        raise ConfigError(str(error)) from error


def config_digest(config: RunConfig) -> str:
    """SHA-256 of the canonical JSON of the config, out_dir excluded."""
    payload = config.model_dump(mode="json", exclude={"out_dir"})
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
