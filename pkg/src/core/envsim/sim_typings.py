import math
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Any
from typing_extensions import Self

import numpy as np

from src.core.consts import CELL_SIZE, MAX_PITCH, N_CATEGORIES
from src.core.errors import ContractViolationError, InvalidStateError

ROTATION_STEPS = (30, 45, 90)
LOOK_STEPS = (15, 30)
TRANSLATION_STEPS = (0.25, 0.5)
BRIGHTNESS_RANGE = (0.5, 1.5)
CONTRAST_RANGE = (0.5, 1.5)
SATURATION_RANGE = (0.0, 2.0)
HUE_RANGE = (-0.1, 0.1)
IDENTITY_PHOTOMETRIC = (1.0, 1.0, 1.0, 0.0)


class FovGroup(Enum):
    """
    Horizontal field-of-view bins.
    Variants:
    - narrow - 60 degrees
    - standard - 90 degrees
    - wide - 120 degrees
    """

    narrow = "narrow"
    standard = "standard"
    wide = "wide"

    @property
    def degrees(self) -> float:
        return {"narrow": 60.0, "standard": 90.0, "wide": 120.0}[self.value]


@dataclass(frozen=True)
class DomainFactor:
    """
    Embodiment and photometric parameters of one domain.
    Parameters:
    - fov_group - horizontal view angle bin
    - rotation_step - degrees per RotateLeft / RotateRight
    - look_step - degrees per LookUp / LookDown
    - translation_step - meters per MoveAhead
    - brightness, contrast, saturation - multiplicative photometric factors
    - hue_shift - hue rotation in turns
    """

    fov_group: FovGroup = FovGroup.standard
    rotation_step: int = 30
    look_step: int = 30
    translation_step: float = 0.25
    brightness: float = 1.0
    contrast: float = 1.0
    saturation: float = 1.0
    hue_shift: float = 0.0

    def __post_init__(self):
        if not isinstance(self.fov_group, FovGroup):
            object.__setattr__(self, "fov_group", FovGroup(self.fov_group))
        checks = [
            (self.rotation_step in ROTATION_STEPS, "rotation_step"),
            (self.look_step in LOOK_STEPS, "look_step"),
            (self.translation_step in TRANSLATION_STEPS, "translation_step"),
            (_within(self.brightness, BRIGHTNESS_RANGE), "brightness"),
            (_within(self.contrast, CONTRAST_RANGE), "contrast"),
            (_within(self.saturation, SATURATION_RANGE), "saturation"),
            (_within(self.hue_shift, HUE_RANGE), "hue_shift"),
        ]
        for ok, name in checks:
            if not ok:
                raise ContractViolationError(
                    f"DomainFactor.{name}={getattr(self, name)!r} is out of range"
                )

    @property
    def fov(self) -> float:
        return self.fov_group.degrees

    @property
    def photometric(self) -> tuple[float, float, float, float]:
        return (self.brightness, self.contrast, self.saturation, self.hue_shift)

    def to_dict(self) -> dict[str, Any]:
        result = {f.name: getattr(self, f.name) for f in fields(self)}
        result["fov_group"] = self.fov_group.value
        return result

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Self:
        return cls(**data)


def _within(value: float, bounds: tuple[float, float]) -> bool:
    return bounds[0] <= value <= bounds[1]


@dataclass(frozen=True)
class SceneObject:
    """
    Object instance placed in a grid cell.
    Parameters:
    - category - category id in [0, 12)
    - cell - (row, col)
    - color - base RGB colour
    - size - apparent height in meters
    """

    category: int
    cell: tuple[int, int]
    color: tuple[int, int, int]
    size: float = 0.5

    def to_dict(self) -> dict[str, Any]:
        return {
            "category": self.category,
            "cell": list(self.cell),
            "color": list(self.color),
            "size": self.size,
        }


@dataclass
class GridScene:
    """
    Top-down occupancy grid with objects.
    Parameters:
    - width, height - grid size in cells
    - walls - boolean array (height, width), True where a wall stands
    - objects - placed object instances
    - cell_size - meters per cell
    """

    width: int
    height: int
    walls: np.ndarray
    objects: list[SceneObject]
    cell_size: float = CELL_SIZE
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.walls = np.asarray(self.walls, dtype=bool)
        if self.walls.shape != (self.height, self.width):
            raise ContractViolationError(
                f"walls shape {self.walls.shape} != ({self.height}, {self.width})"
            )
        for obj in self.objects:
            row, col = obj.cell
            if not (0 <= obj.category < N_CATEGORIES):
                raise ContractViolationError(f"unknown category {obj.category}")
            if not self.in_bounds(row, col) or self.walls[row, col]:
                raise ContractViolationError(f"object {obj} is not on a free cell")

    def in_bounds(self, row: int, col: int) -> bool:
        return 0 <= row < self.height and 0 <= col < self.width

    @property
    def object_grid(self) -> np.ndarray:
        """Object index per cell, -1 where empty."""
        if "object_grid" not in self._cache:
            grid = np.full((self.height, self.width), -1, dtype=np.int64)
            for index, obj in enumerate(self.objects):
                grid[obj.cell] = index
            self._cache["object_grid"] = grid
        return self._cache["object_grid"]

    @property
    def traversable(self) -> np.ndarray:
        """Cells the agent may occupy."""
        if "traversable" not in self._cache:
            self._cache["traversable"] = ~self.walls & (self.object_grid < 0)
        return self._cache["traversable"]

    @property
    def categories(self) -> set[int]:
        return {obj.category for obj in self.objects}

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return int(math.floor(y / self.cell_size)), int(math.floor(x / self.cell_size))

    def cell_center(self, row: int, col: int) -> tuple[float, float]:
        return (col + 0.5) * self.cell_size, (row + 0.5) * self.cell_size

    def is_free(self, x: float, y: float) -> bool:
        row, col = self.cell_of(x, y)
        return self.in_bounds(row, col) and bool(self.traversable[row, col])

    def to_dict(self) -> dict[str, Any]:
        return {
            "width": self.width,
            "height": self.height,
            "cell_size": self.cell_size,
            "walls": self.walls.astype(int).ravel().tolist(),
            "objects": [obj.to_dict() for obj in self.objects],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Self:
        width, height = int(data["width"]), int(data["height"])
        walls = np.asarray(data["walls"], dtype=bool).reshape(height, width)
        objects = [
            SceneObject(
                category=int(item["category"]),
                cell=(int(item["cell"][0]), int(item["cell"][1])),
                color=tuple(int(c) for c in item["color"]),
                size=float(item.get("size", 0.5)),
            )
            for item in data["objects"]
        ]
        return cls(
            width=width,
            height=height,
            walls=walls,
            objects=objects,
            cell_size=float(data.get("cell_size", CELL_SIZE)),
        )


@dataclass(frozen=True)
class AgentState:
    """
    Hidden agent pose.
    Parameters:
    - x, y - position in meters
    - heading - degrees in [0, 360), counter-clockwise from +x
    - pitch - degrees in [-60, 60], positive looks up
    """

    x: float
    y: float
    heading: float = 0.0
    pitch: float = 0.0

    def validate(self, scene: GridScene, factor: DomainFactor | None = None) -> None:
        if not scene.is_free(self.x, self.y):
            raise InvalidStateError(f"agent at ({self.x:.3f}, {self.y:.3f}) is not in free space")
        if not (0.0 <= self.heading < 360.0):
            raise InvalidStateError(f"heading {self.heading} outside [0, 360)")
        if abs(self.pitch) > MAX_PITCH:
            raise InvalidStateError(f"pitch {self.pitch} outside [-60, 60]")
        if factor is not None and self.heading % factor.rotation_step != 0:
            raise InvalidStateError(
                f"heading {self.heading} is not a multiple of {factor.rotation_step}"
            )

    def to_dict(self) -> dict[str, float]:
        return {"x": self.x, "y": self.y, "heading": self.heading, "pitch": self.pitch}

    @classmethod
    def from_dict(cls, data: dict[str, float]) -> Self:
        return cls(**{k: float(v) for k, v in data.items()})


@dataclass(frozen=True)
class Observation:
    """Egocentric RGB frame, uint8 array of shape (3, H, W)."""

    rgb: np.ndarray

    def __post_init__(self):
        if self.rgb.dtype != np.uint8 or self.rgb.ndim != 3 or self.rgb.shape[0] != 3:
            raise ContractViolationError(
                f"observation must be uint8 (3, H, W), got {self.rgb.dtype} {self.rgb.shape}"
            )


@dataclass(frozen=True)
class StepOutcome:
    next_agent: AgentState
    reward: float
    done: bool
    success: bool
    geodesic: float
    moved: float = 0.0
