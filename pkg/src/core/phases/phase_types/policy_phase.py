from src.core.checkpoint import save_modules
from src.core.encoder.features import PromptFeatureExtractor
from src.core.errors import ContractViolationError
from src.core.orchestrator.attention import FusionMode
from src.core.phases.base_phase import BasePhase
from src.core.phases.loaders import load_encoder, load_pool, load_scene_pool, load_split
from src.core.phases.phase_typings import ArtifactName
from src.core.policy.trainer import train_policy


def uses_prompts(fusion: str) -> bool:
    return FusionMode(fusion) != FusionMode.vanilla


class PolicyPhase(BasePhase):
    def __init__(self, prompt_artifacts: list[ArtifactName], check_frozen: bool = True, **kwargs):
        """PPO over the source factors with a frozen encoder and prompt pool."""
        super().__init__(**kwargs)
        self._prompt_artifacts = prompt_artifacts
        self._check_frozen = check_frozen

    @property
    def required_artifacts(self) -> list[ArtifactName]:
        extra = self._prompt_artifacts if uses_prompts(self._config.orchestrator.fusion) else []
        return [*self._required_artifacts, *extra]

    def _run(self) -> None:
        config = self._config
        store = self._artifact_store
        fusion = FusionMode(config.orchestrator.fusion)
        encoder = load_encoder(store)
        pool = load_pool(store, encoder) if uses_prompts(config.orchestrator.fusion) else None
        extractor = PromptFeatureExtractor(encoder, pool)
        frozen = (encoder.checksum(), pool.checksum() if pool is not None else None)

        report = train_policy(
            load_scene_pool(store),
            load_split(store).source,
            extractor,
            config.ppo,
            fusion,
            config.seed,
            config.env.image_size,
            config.env.max_steps,
            orchestrator_hidden=config.orchestrator.hidden,
            log_path=store.path("policy_log"),
            curve_path=store.path("reward_curve"),
            show_progress=self.show_progress,
            config_digest=self._digest,
        )
        after = (encoder.checksum(), pool.checksum() if pool is not None else None)
        if self._check_frozen and after != frozen:
            raise ContractViolationError("encoder or prompts changed during policy training")

        save_modules(
            store.path("policy"),
            {"core": report.core, "orchestrator": report.orchestrator},
            self.metadata(
                encoder_digest=frozen[0],
                prompts_digest=frozen[1],
                fusion=fusion.value,
                orchestrator_hidden=config.orchestrator.hidden,
                hidden=config.ppo.hidden,
                action_embedding=config.ppo.action_embedding,
                updates=report.updates,
                episodes=report.episodes,
            ),
        )
