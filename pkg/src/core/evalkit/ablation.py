import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from src.core.config import RunConfig
from src.core.errors import UnknownVariantError
from src.core.logs import write_csv

PROMPT_LENGTHS = (4, 8, 16, 24)
SIGMAS = (0.0, 0.1, 0.3, 0.5)
SWEEP_HEADER = ("variant", "seed", "split", "SR", "SPL", "NE", "EL")


@dataclass(frozen=True)
class AblationVariant:
    """
    A named deviation from the full method.
    Parameters:
    - name - variant name as given on the command line
    - overrides - dotted config keys and the values they take
    - trains_prompts - False when the variant runs without any prompt pool
    """

    name: str
    overrides: dict[str, Any] = field(default_factory=dict)
    trains_prompts: bool = True

    @property
    def slug(self) -> str:
        return re.sub(r"[^A-Za-z0-9.=-]+", "_", self.name)


FIXED_VARIANTS: dict[str, dict[str, Any]] = {
    "full": {},
    "w/o-visual": {"prompts.use_visual": False},
    "w/o-action": {"prompts.use_action": False},
    "w/o-text": {"prompts.use_text": False},
    "avg-fusion": {"orchestrator.fusion": "average"},
    "att-only": {"orchestrator.fusion": "attention_only"},
    "cos-only": {"orchestrator.fusion": "cosine_only"},
    "reg-only": {"prompts.use_text": False},
    "vanilla-ppo": {"orchestrator.fusion": "vanilla"},
}
VALUE_VARIANT = re.compile(r"^(K|L|sigma|σ)=(.+)$")


def parse_variant(name: str) -> AblationVariant:
    """full, w/o-visual, w/o-action, w/o-text, avg-fusion, att-only, cos-only, reg-only,
    vanilla-ppo, K=2..12, L in {4, 8, 16, 24}, sigma in {0, 0.1, 0.3, 0.5}."""
    if name in FIXED_VARIANTS:
        return AblationVariant(name, dict(FIXED_VARIANTS[name]), trains_prompts=name != "vanilla-ppo")
    match = VALUE_VARIANT.match(name)
    if match is None:
        raise UnknownVariantError(f"unknown ablation variant {name!r}")
    key, raw = match.groups()
    key = "sigma" if key == "σ" else key
    try:
        value = float(raw) if key == "sigma" else int(raw)
    except ValueError as error:
        raise UnknownVariantError(f"variant {name!r} has a non-numeric value") from error
    if key == "K" and 2 <= value <= 12:
        return AblationVariant(name, {"prompts.n_prompts": value})
    if key == "L" and value in PROMPT_LENGTHS:
        return AblationVariant(name, {"prompts.length": value})
    if key == "sigma" and value in SIGMAS:
        return AblationVariant(name, {"loss.sigma": value})
    raise UnknownVariantError(f"variant {name!r} is outside the supported range")


def apply_variant(config: RunConfig, variant: AblationVariant, seed: int | None = None) -> RunConfig:
    """Copy of config with the variant's overrides; reg-only moves sigma onto the policy features."""
    data = config.model_dump(mode="json")
    for key, value in variant.overrides.items():
        node = data
        *parents, leaf = key.split(".")
        for part in parents:
            node = node[part]
        node[leaf] = value
    if variant.name == "reg-only":
        data["ppo"]["feature_noise"] = config.loss.sigma
    if seed is not None:
        data["seed"] = seed
    return RunConfig.model_validate(data)


def sweep_rows(name: str, seed: int, report: dict[str, dict[str, Any]]) -> list[list[Any]]:
    """Summary rows (variant, seed, split, SR, SPL, NE, EL) of one metrics report."""
    return [
        [name, seed, split, *(metrics[m]["mean"] for m in SWEEP_HEADER[3:])]
        for split, metrics in report.items()
    ]


def write_sweep(path: Path | str, rows: Iterable[list[Any]], config_digest: str | None = None) -> Path:
    return write_csv(path, SWEEP_HEADER, rows, config_digest)
