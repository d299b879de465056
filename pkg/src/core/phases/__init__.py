from .base_phase import BasePhase
from .phase_parameters import COMMANDS, PHASE_PARAMETERS, PhaseParameters
from .phase_typings import Artifact, ArtifactName, ArtifactStore

__all__ = [
    "Artifact",
    "ArtifactName",
    "ArtifactStore",
    "BasePhase",
    "COMMANDS",
    "PHASE_PARAMETERS",
    "PhaseParameters",
]
