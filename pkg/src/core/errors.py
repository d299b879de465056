class CapoError(Exception):
    """Base error of the package."""


class ContractViolationError(CapoError, ValueError):
    """Arguments break a documented precondition."""


class InvalidStateError(ContractViolationError):
    """Agent state is outside free space or out of range."""


class MissingGoalError(CapoError, ValueError):
    """Goal category is not present in the scene."""


class PlanningError(CapoError):
    """Goal cannot be reached from the agent position."""


class CollectionError(CapoError):
    """Expert data collection produced no usable trajectories."""


class EncoderShapeError(ContractViolationError):
    """Observation does not match the encoder patch grid."""


class SamplingError(CapoError, ValueError):
    """Contrastive pair sampling produced an invalid pair."""


class AugmentorConfigError(CapoError, ValueError):
    """Photometric augmentor perturbs dimensions it does not own."""


class TrainingDivergedError(CapoError):
    """Loss became non-finite during training."""


class ConfigError(CapoError, ValueError):
    """Run configuration is invalid."""


class PrerequisiteError(CapoError):
    """A phase was started before the artifacts it needs exist."""


class DigestMismatchError(CapoError):
    """Checkpoints were produced by incompatible upstream artifacts."""


class UnknownVariantError(CapoError, ValueError):
    """Ablation variant name is not recognised."""
