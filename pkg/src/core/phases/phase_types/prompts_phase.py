import logging

from src.core.checkpoint import save_module
from src.core.encoder.text_anchors import text_anchor_table
from src.core.errors import ContractViolationError
from src.core.phases.base_phase import BasePhase
from src.core.phases.loaders import load_encoder, load_manifest
from src.core.prompt_learning.trainer import train_prompts


class PromptsPhase(BasePhase):
    def __init__(self, check_frozen: bool = True, **kwargs):
        """Contrastive prompt learning on the frozen encoder."""
        super().__init__(**kwargs)
        self._check_frozen = check_frozen

    def _run(self) -> None:
        config = self._config
        manifest = load_manifest(self._artifact_store)
        encoder = load_encoder(self._artifact_store)
        encoder_digest = encoder.checksum()
        anchors = text_anchor_table(config.encoder.anchor_seed, encoder.d_out)

        report = train_prompts(
            manifest,
            encoder,
            config.prompts,
            config.loss,
            anchors,
            config.seed,
            log_path=self._artifact_store.path("prompt_log"),
            show_progress=self.show_progress,
            config_digest=self._digest,
        )
        if self._check_frozen and encoder.checksum() != encoder_digest:
            raise ContractViolationError("the encoder changed during prompt learning")

        pool = report.pool
        save_module(
            self._artifact_store.path("prompts"),
            pool,
            self.metadata(
                encoder_digest=encoder_digest,
                layout=pool.names,
                length=pool.length,
                prompt_dim=pool.prompt_dim,
                hidden=pool.hidden,
                call_counts=report.call_counts,
                last_losses=report.last_losses,
                iterations=report.iterations,
            ),
        )
        logging.info(f"Prompt loss evaluations per branch: {report.call_counts}")
