from dataclasses import asdict, dataclass
from typing import Any, Sequence
from typing_extensions import Self

import numpy as np

from src.core.errors import ContractViolationError

METRICS = ("SR", "SPL", "NE", "EL")


@dataclass(frozen=True)
class EpisodeRecord:
    """
    Outcome of one evaluation episode.
    Parameters:
    - success - whether End was called within the success radius
    - d_star - geodesic start-to-goal distance in meters
    - path_length - meters travelled
    - final_distance - Euclidean distance from the final position to the nearest goal-object centre
    - steps - actions taken
    - final_geodesic - geodesic distance to the nearest goal-adjacent cell at the end, the quantity
      success is judged on
    """

    success: bool
    d_star: float
    path_length: float
    final_distance: float
    steps: int
    final_geodesic: float | None = None

    def __post_init__(self):
        if self.path_length < 0 or self.d_star < 0:
            raise ContractViolationError(f"negative distances in {self}")

    @classmethod
    def from_info(cls, info: dict[str, Any]) -> Self:
        return cls(
            success=bool(info["success"]),
            d_star=float(info["d_star"]),
            path_length=float(info["path_length"]),
            final_distance=float(info["final_distance"]),
            steps=int(info["steps"]),
            final_geodesic=float(info["geodesic"]) if "geodesic" in info else None,
        )

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def spl_term(record: EpisodeRecord) -> float:
    """success * d* / max(d*, p); a successful zero-length start counts 1."""
    if not record.success:
        return 0.0
    denominator = max(record.d_star, record.path_length)
    return 1.0 if denominator == 0 else record.d_star / denominator


def summarize(records: Sequence[EpisodeRecord]) -> dict[str, float]:
    """
    SR in percent, SPL in [0, 1], NE in meters, EL in steps.
    NE averages the Euclidean final_distance to the goal-object centre, not the geodesic that
    decides success; an agent stopping on a goal-adjacent cell has NE 0.25 and geodesic 0.
    """
    if not records:
        raise ContractViolationError("no episodes to summarize")
    return {
        "SR": 100.0 * float(np.mean([r.success for r in records])),
        "SPL": float(np.mean([spl_term(r) for r in records])),
        "NE": float(np.mean([r.final_distance for r in records])),
        "EL": float(np.mean([r.steps for r in records])),
    }


def aggregate(per_seed: Sequence[dict[str, float]]) -> dict[str, dict[str, Any]]:
    """{metric: {mean, std, per_seed}} over seed-level summaries."""
    if not per_seed:
        raise ContractViolationError("no seed summaries to aggregate")
    result = {}
    for metric in METRICS:
        values = [summary[metric] for summary in per_seed]
        result[metric] = {
            "mean": float(np.mean(values)),
            "std": float(np.std(values)),
            "per_seed": values,
        }
    return result
