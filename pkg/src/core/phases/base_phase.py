import logging
from abc import abstractmethod

from src.core.config import RunConfig, config_digest
from src.core.errors import PrerequisiteError
from src.core.logs import progress_enabled
from src.core.phases.phase_typings import Artifact, ArtifactName, ArtifactStore

PRODUCERS: dict[ArtifactName, str] = {
    "dataset": "collect",
    "split": "collect",
    "encoder": "pretrain-backbone",
    "prompts": "train-prompts",
    "policy": "train-policy",
}


class BasePhase:
    def __init__(
        self,
        name: str,
        config: RunConfig,
        artifact_store: ArtifactStore,
        required_artifacts: list[ArtifactName],
        output_artifacts: list[ArtifactName],
        logging_info: tuple[str | None, str | None] = (None, None),
        **kwargs,
    ):
        """Abstract pipeline phase to inherit from."""
        self._name: str = name
        self._config: RunConfig = config
        self._artifact_store: ArtifactStore = artifact_store
        self._required_artifacts: list[ArtifactName] = required_artifacts
        self._output_artifacts: list[ArtifactName] = output_artifacts
        self._logging_info: tuple[str | None, str | None] = logging_info
        self._digest: str = config_digest(config)

    def run(self) -> list[Artifact]:
        """Check prerequisites, run the phase and register its outputs."""
        missing = self._artifact_store.missing(self.required_artifacts)
        if missing:
            hints = sorted({PRODUCERS[name] for name in missing if name in PRODUCERS})
            raise PrerequisiteError(
                f"{self._name} needs {missing} under {self._artifact_store.root};"
                f" run {', '.join(hints) or 'the producing phase'} first"
            )

        logging.info(f"{self._name}: config digest {self._digest}")
        if self._logging_info[0] is not None:
            logging.info(self._logging_info[0])

        self._run()

        if self._logging_info[1] is not None:
            logging.info(self._logging_info[1])

        return self.save_artifacts()

    @abstractmethod
    def _run(self) -> None:
        """Run phase."""
        raise NotImplementedError

    def save_artifacts(self) -> list[Artifact]:
        """Register every output that now exists on disk."""
        return [
            self._artifact_store.add(name)
            for name in self._output_artifacts
            if self._artifact_store.get(name).exists
        ]

    def metadata(self, **extra) -> dict:
        return {"config_digest": self._digest, **extra}

    @property
    def show_progress(self) -> bool:
        return progress_enabled()

    @property
    def name(self) -> str:
        """Phase name."""
        return self._name

    @property
    def required_artifacts(self) -> list[ArtifactName]:
        return list(self._required_artifacts)

    @property
    def output_artifacts(self) -> set[ArtifactName]:
        return set(self._output_artifacts)
