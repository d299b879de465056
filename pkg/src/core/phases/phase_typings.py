from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TypeAlias

ArtifactName: TypeAlias = str

ARTIFACT_FILES: dict[ArtifactName, str] = {
    "dataset": "dataset/trajectories.jsonl",
    "split": "split.json",
    "encoder": "checkpoints/encoder.bin",
    "prompts": "checkpoints/prompts.bin",
    "policy": "checkpoints/policy.bin",
    "reward_curve": "reward_curve.csv",
    "metrics": "metrics.json",
    "alpha_trace": "alpha_trace.csv",
    "gap": "gap.json",
    "gap_samples": "gap.csv",
    "embeddings": "embeddings.csv",
    "separation": "separation.json",
    "ablation": "ablation.csv",
    "prompt_log": "logs/prompt_training.jsonl",
    "policy_log": "logs/policy_training.jsonl",
}


@dataclass
class Artifact:
    """
    File produced by a phase.
    Parameters:
    - name - artifact name
    - path - location on disk
    """

    name: ArtifactName
    path: Path

    @property
    def exists(self) -> bool:
        return self.path.exists()


class ArtifactStore:
    """
    Artifacts of one run directory. `shared` maps names to files owned by another run,
    so ablation sub-runs reuse the parent's dataset and encoder.
    """

    def __init__(self, root: Path | str, shared: dict[ArtifactName, Path] | None = None):
        self.root = Path(root)
        self.shared: dict[ArtifactName, Path] = dict(shared or {})
        self.produced: list[Artifact] = []

    def path(self, name: ArtifactName) -> Path:
        if name in self.shared:
            return self.shared[name]
        if name not in ARTIFACT_FILES:
            raise KeyError(f"unknown artifact {name!r}")
        return self.root / ARTIFACT_FILES[name]

    def get(self, name: ArtifactName) -> Artifact:
        return Artifact(name, self.path(name))

    def add(self, name: ArtifactName) -> Artifact:
        artifact = self.get(name)
        self.produced.append(artifact)
        return artifact

    def missing(self, names: Iterable[ArtifactName]) -> list[ArtifactName]:
        return [name for name in names if not self.get(name).exists]

    def contains(self, names: Iterable[ArtifactName]) -> bool:
        return not self.missing(names)

    def child(self, subdir: str, shared: Iterable[ArtifactName]) -> "ArtifactStore":
        """Store rooted at root/subdir that reads the listed artifacts from this store."""
        return ArtifactStore(self.root / subdir, {name: self.path(name) for name in shared})
