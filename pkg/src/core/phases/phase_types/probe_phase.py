from src.core.encoder.features import PromptFeatureExtractor
from src.core.evalkit.gap import probe_gap
from src.core.logs import write_csv, write_json
from src.core.phases.base_phase import BasePhase
from src.core.phases.loaders import load_encoder, load_manifest, load_pool

SAMPLES_HEADER = ("sample", "n_prompts", "residual", "iterations", "converged")


class ProbePhase(BasePhase):
    """Approximation gap of every prompt prefix on frames from the non-base factors."""

    def _run(self) -> None:
        store = self._artifact_store
        encoder = load_encoder(store)
        pool = load_pool(store, encoder)
        results, summary = probe_gap(
            PromptFeatureExtractor(encoder, pool), load_manifest(store), self._config.probe, self._config.seed
        )
        write_json(
            store.path("gap"),
            self.metadata(prompts=[pool.names[k] for k in pool.domain_indices], by_prefix=summary),
        )
        rows = (
            [sample, k + 1, result.residual, result.iterations, int(result.converged)]
            for sample, per_prefix in enumerate(results)
            for k, result in enumerate(per_prefix)
        )
        write_csv(store.path("gap_samples"), SAMPLES_HEADER, rows, self._digest)
