import json
import logging
from typing import Any

from src.core.config import RunConfig
from src.core.evalkit.ablation import AblationVariant, apply_variant, parse_variant, sweep_rows, write_sweep
from src.core.logs import read_csv, write_csv
from src.core.phases.base_phase import BasePhase
from src.core.phases.phase_parameters import PHASE_PARAMETERS
from src.core.phases.phase_types.collect_phase import CollectPhase
from src.core.phases.phase_types.evaluate_phase import EvaluatePhase
from src.core.phases.phase_types.policy_phase import PolicyPhase
from src.core.phases.phase_types.pretrain_phase import PretrainPhase
from src.core.phases.phase_types.prompts_phase import PromptsPhase
from src.core.phases.phase_typings import ArtifactStore
from src.core.policy.trainer import CURVE_HEADER, merge_reward_curves

SHARED_ARTIFACTS = ("dataset", "split", "encoder")


def _phase(
    phase_class: type[BasePhase], command: str, config: RunConfig, store: ArtifactStore, **extra
) -> BasePhase:
    parameters = {**PHASE_PARAMETERS[command].to_dict(), **extra}
    return phase_class(name=command, config=config, artifact_store=store, **parameters)


def _read_curve(store: ArtifactStore) -> list[tuple[int, float | None, int]]:
    rows = read_csv(store.path("reward_curve"))
    return [
        (int(r["env_steps"]), float(r["mean_reward"]) if r["mean_reward"] else None, int(r["episodes"]))
        for r in rows
    ]


def run_ablation(
    variant: AblationVariant,
    config: RunConfig,
    store: ArtifactStore,
    seeds: list[int],
    config_digest: str | None = None,
) -> dict[int, dict[str, Any]]:
    """
    Train and evaluate one variant per seed in root/ablation/<variant>/seed_<s>, reusing the
    dataset and the encoder of `store`. Returns the metrics report per seed.
    """
    reports, curves = {}, []
    for seed in seeds:
        child = store.child(f"ablation/{variant.slug}/seed_{seed}", SHARED_ARTIFACTS)
        child_config = apply_variant(config, variant, seed)
        phases = []
        if variant.trains_prompts:
            phases.append(_phase(PromptsPhase, "train-prompts", child_config, child))
        phases.append(_phase(PolicyPhase, "train-policy", child_config, child))
        phases.append(_phase(EvaluatePhase, "evaluate", child_config, child, trace_alphas=False))
        for phase in phases:
            phase.run()
        store.produced.extend(child.produced)

        with child.path("metrics").open("r", encoding="utf-8") as file:
            reports[seed] = json.load(file)["splits"]
        curves.append(_read_curve(child))

    write_csv(
        store.root / "ablation" / variant.slug / "reward_curve.csv",
        (CURVE_HEADER[0], "mean_reward", "std_reward"),
        merge_reward_curves(curves),
        config_digest,
    )
    return reports


class AblatePhase(BasePhase):
    def __init__(self, variants: list[str] | None = None, seeds: list[int] | None = None, **kwargs):
        """Collect once, then train-prompts -> train-policy -> evaluate per variant and seed."""
        super().__init__(**kwargs)
        self._variants = variants
        self._seeds = seeds

    def _ensure_shared(self) -> None:
        for phase_class, command in ((CollectPhase, "collect"), (PretrainPhase, "pretrain-backbone")):
            if not self._artifact_store.contains(PHASE_PARAMETERS[command].output_artifacts):
                _phase(phase_class, command, self._config, self._artifact_store).run()

    def _run(self) -> None:
        names = self._variants if self._variants is not None else self._config.ablation.variants
        seeds = self._seeds if self._seeds is not None else self._config.ablation.seeds
        variants = [parse_variant(name) for name in names]
        self._ensure_shared()

        rows = []
        for variant in variants:
            logging.info(f"Ablation variant {variant.name} over seeds {seeds}")
            reports = run_ablation(variant, self._config, self._artifact_store, seeds, self._digest)
            for seed, report in reports.items():
                rows.extend(sweep_rows(variant.name, seed, report))
        write_sweep(self._artifact_store.path("ablation"), rows, self._digest)
