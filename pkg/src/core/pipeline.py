from src.core.config import RunConfig
from src.core.phases.base_phase import BasePhase
from src.core.phases.phase_parameters import (
    PHASE_PARAMETERS,
    AblateParameters,
    CollectParameters,
    EvaluateParameters,
    ExportParameters,
    PhaseParameters,
    PolicyParameters,
    PretrainParameters,
    ProbeParameters,
    PromptsParameters,
)
from src.core.phases.phase_types import (
    AblatePhase,
    CollectPhase,
    EvaluatePhase,
    ExportPhase,
    PolicyPhase,
    PretrainPhase,
    ProbePhase,
    PromptsPhase,
)
from src.core.phases.phase_typings import Artifact, ArtifactStore

PHASE_TYPES: tuple[tuple[type[PhaseParameters], type[BasePhase]], ...] = (
    (CollectParameters, CollectPhase),
    (PretrainParameters, PretrainPhase),
    (PromptsParameters, PromptsPhase),
    (PolicyParameters, PolicyPhase),
    (EvaluateParameters, EvaluatePhase),
    (ProbeParameters, ProbePhase),
    (ExportParameters, ExportPhase),
    (AblateParameters, AblatePhase),
)


class Pipeline:
    def __init__(self, config: RunConfig, artifact_store: ArtifactStore, **phases: PhaseParameters):
        """Pipeline to run a sequence of phases over one run directory."""
        self._config = config
        self._artifact_store = artifact_store
        self._phases: dict[str, BasePhase] = {}

        for name, phase_parameters in phases.items():
            self._phases[name] = self._create_phase(name, phase_parameters)

    def run(self) -> list[Artifact]:
        """Run phases in insertion order; a failing phase stops the pipeline."""
        for phase in self._phases.values():
            phase.run()
        return list(self._artifact_store.produced)

    @property
    def phases(self) -> list[BasePhase]:
        return list(self._phases.values())

    def _create_phase(self, name: str, phase_parameters: PhaseParameters) -> BasePhase:
        """Create phase by its parameters."""
        for parameters_type, phase_type in PHASE_TYPES:
            if isinstance(phase_parameters, parameters_type):
                return phase_type(
                    name=name,
                    config=self._config,
                    artifact_store=self._artifact_store,
                    **phase_parameters.to_dict(),
                )

        raise ValueError(f"Unknown phase type: {type(phase_parameters)}")


def build_pipeline(command: str, config: RunConfig, artifact_store: ArtifactStore | None = None) -> Pipeline:
    """Pipeline of the single phase behind a CLI command."""
    if command not in PHASE_PARAMETERS:
        raise ValueError(f"Unknown command: {command}")
    store = artifact_store if artifact_store is not None else ArtifactStore(config.out_path)
    return Pipeline(config, store, **{command: PHASE_PARAMETERS[command]})
