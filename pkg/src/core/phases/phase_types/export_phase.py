import logging

from src.core.evalkit.export import export_embeddings, prompt_separation
from src.core.logs import write_json
from src.core.phases.base_phase import BasePhase
from src.core.phases.loaders import load_encoder, load_manifest, load_pool


class ExportPhase(BasePhase):
    def _run(self) -> None:
        store = self._artifact_store
        encoder = load_encoder(store)
        pool = load_pool(store, encoder)
        export = export_embeddings(
            encoder,
            pool,
            load_manifest(store).frame_table(),
            self._config.export.n_samples,
            self._config.seed,
        )
        export.write(store.path("embeddings"), self._digest)
        separation = prompt_separation(export)
        write_json(store.path("separation"), self.metadata(**separation))
        logging.info(
            f"Prompt separation: within {separation['within']:.3f}, across {separation['across']:.3f}"
        )
