from .artifact_record import ArtifactRecord
from .pipeline_run import PipelineRun, RunStatus

__all__ = [
    "ArtifactRecord",
    "PipelineRun",
    "RunStatus",
]
