from src.core.checkpoint import save_module
from src.core.encoder.pretrain import pretrain_backbone
from src.core.phases.base_phase import BasePhase
from src.core.phases.loaders import load_manifest


class PretrainPhase(BasePhase):
    def _run(self) -> None:
        config = self._config
        manifest = load_manifest(self._artifact_store)
        encoder, accuracy = pretrain_backbone(
            manifest.frame_table(),
            config.encoder,
            config.seed,
            config.env.image_size,
            show_progress=self.show_progress,
        )
        save_module(
            self._artifact_store.path("encoder"),
            encoder,
            self.metadata(
                encoder_digest=encoder.checksum(),
                encoder=config.encoder.model_dump(),
                image_size=config.env.image_size,
                holdout_accuracy=accuracy,
            ),
        )
