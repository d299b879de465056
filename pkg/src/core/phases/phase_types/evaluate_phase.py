import logging

from src.core.encoder.features import PromptFeatureExtractor
from src.core.evalkit.evaluate import evaluate, trace_alphas
from src.core.logs import write_json
from src.core.orchestrator.attention import write_alpha_trace
from src.core.phases.base_phase import BasePhase
from src.core.phases.loaders import load_encoder, load_policy, load_pool, load_scene_pool, load_split
from src.core.phases.phase_types.policy_phase import uses_prompts
from src.core.phases.phase_typings import ArtifactName


class EvaluatePhase(BasePhase):
    def __init__(self, prompt_artifacts: list[ArtifactName], trace_alphas: bool = True, **kwargs):
        """Deterministic evaluation per split, plus an attention trace on the unseen split."""
        super().__init__(**kwargs)
        self._prompt_artifacts = prompt_artifacts
        self._trace_alphas = trace_alphas

    @property
    def required_artifacts(self) -> list[ArtifactName]:
        extra = self._prompt_artifacts if uses_prompts(self._config.orchestrator.fusion) else []
        return [*self._required_artifacts, *extra]

    def _run(self) -> None:
        config = self._config
        store = self._artifact_store
        encoder = load_encoder(store)
        pool = load_pool(store, encoder) if uses_prompts(config.orchestrator.fusion) else None
        extractor = PromptFeatureExtractor(encoder, pool)
        policy, metadata = load_policy(store, extractor)
        if metadata["fusion"] != config.orchestrator.fusion:
            logging.warning(
                f"Policy was trained with fusion {metadata['fusion']}, config says {config.orchestrator.fusion}"
            )
        scenes = load_scene_pool(store)
        split = load_split(store)

        report = evaluate(
            policy,
            scenes,
            split,
            config.evaluation.episodes_per_domain,
            config.seed,
            n_seeds=config.evaluation.n_eval_seeds,
            splits=config.evaluation.splits,
            image_size=config.env.image_size,
            max_steps=config.env.max_steps,
        )
        write_json(
            store.path("metrics"),
            self.metadata(encoder_digest=encoder.checksum(), seed=config.seed, splits=report),
        )

        if self._trace_alphas and pool is not None:
            alphas = trace_alphas(
                policy,
                scenes,
                split.unseen,
                config.export.alpha_trace_steps,
                config.seed,
                config.env.image_size,
                config.env.max_steps,
            )
            names = [pool.names[k] for k in pool.domain_indices]
            write_alpha_trace(store.path("alpha_trace"), alphas, names, self._digest)
