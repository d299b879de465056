from src.core.envsim.scenes import generate_scene
from src.core.evalkit.splits import build_split
from src.core.expert_data.collection import collect_and_align
from src.core.expert_data.storage import save_dataset
from src.core.logs import write_json
from src.core.phases.base_phase import BasePhase
from src.core.seeding import keyed_seed

SCENE_STREAM = 100


class CollectPhase(BasePhase):
    """Scenes, domain split and the aligned expert dataset over source + seen factors."""

    def _run(self) -> None:
        config = self._config
        split = build_split(config.split)
        scenes = [
            generate_scene(
                keyed_seed(config.seed, SCENE_STREAM, index),
                size=config.env.scene_size,
                n_wall_segments=config.env.n_wall_segments,
                duplicates=config.env.duplicates,
            )
            for index in range(config.env.n_scenes)
        ]
        manifest = collect_and_align(
            scenes,
            split.representation_factors,
            config.collect.n_per_factor,
            config.collect.kappa,
            config.seed,
            shared_starts=config.collect.shared_starts,
            n_workers=config.collect.n_workers,
            image_size=config.env.image_size,
            max_steps=config.env.max_steps,
            show_progress=self.show_progress,
        )
        save_dataset(manifest, self._artifact_store.path("dataset").parent, self._digest)
        write_json(self._artifact_store.path("split"), {**self.metadata(), **split.to_dict()})
