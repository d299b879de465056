import json
import logging
from pathlib import Path

import numpy as np
from scipy import ndimage

from src.core.consts import CATEGORY_COLORS, CELL_SIZE, N_CATEGORIES
from src.core.envsim.sim_typings import (
    BRIGHTNESS_RANGE,
    CONTRAST_RANGE,
    HUE_RANGE,
    LOOK_STEPS,
    ROTATION_STEPS,
    SATURATION_RANGE,
    TRANSLATION_STEPS,
    DomainFactor,
    FovGroup,
    GridScene,
    SceneObject,
)
from src.core.errors import ContractViolationError

MAX_ATTEMPTS = 100
FOUR_CONNECTED = ndimage.generate_binary_structure(2, 1)


def is_connected(traversable: np.ndarray) -> bool:
    _, n_components = ndimage.label(traversable, structure=FOUR_CONNECTED)
    return n_components == 1


def generate_scene(
    seed: int,
    size: int = 12,
    n_wall_segments: int = 3,
    duplicates: int = 0,
    cell_size: float = CELL_SIZE,
) -> GridScene:
    """
    Random bordered room with interior wall segments and every category placed once
    (plus `duplicates` extra instances). Traversable cells stay 4-connected.
    """
    for attempt in range(MAX_ATTEMPTS):
        rng = np.random.default_rng([seed, attempt])
        walls = np.zeros((size, size), dtype=bool)
        walls[0, :] = walls[-1, :] = walls[:, 0] = walls[:, -1] = True

        for _ in range(n_wall_segments):
            length = int(rng.integers(2, max(3, size // 3)))
            row, col = (int(v) for v in rng.integers(2, size - 2, size=2))
            vertical = bool(rng.integers(0, 2))
            for i in range(length):
                r, c = (row + i, col) if vertical else (row, col + i)
                if 0 < r < size - 1 and 0 < c < size - 1:
                    walls[r, c] = True
        if not is_connected(~walls):
            continue

        categories = list(range(N_CATEGORIES)) + [
            int(c) for c in rng.integers(0, N_CATEGORIES, size=duplicates)
        ]
        objects = _place_objects(rng, walls, categories)
        if objects is None:
            continue
        scene = GridScene(
            width=size, height=size, walls=walls, objects=objects, cell_size=cell_size
        )
        logging.debug(f"Scene {seed} generated on attempt {attempt}")
        return scene

    raise ContractViolationError(f"could not generate a connected scene for seed {seed}")


def _place_objects(
    rng: np.random.Generator, walls: np.ndarray, categories: list[int]
) -> list[SceneObject] | None:
    occupied = walls.copy()
    objects = []
    for category in categories:
        free = np.argwhere(~occupied)
        rng.shuffle(free)
        for row, col in free:
            occupied[row, col] = True
            if is_connected(~occupied) and _has_free_neighbour(occupied, row, col):
                objects.append(
                    SceneObject(
                        category=category,
                        cell=(int(row), int(col)),
                        color=CATEGORY_COLORS[category],
                        size=float(rng.uniform(0.3, 0.8)),
                    )
                )
                break
            occupied[row, col] = False
        else:
            return None
    return objects


def _has_free_neighbour(occupied: np.ndarray, row: int, col: int) -> bool:
    height, width = occupied.shape
    for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        r, c = row + dr, col + dc
        if 0 <= r < height and 0 <= c < width and not occupied[r, c]:
            return True
    return False


def save_scene(scene: GridScene, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as file:
        json.dump(scene.to_dict(), file)
    return path


def load_scene(path: Path | str) -> GridScene:
    with Path(path).open("r", encoding="utf-8") as file:
        return GridScene.from_dict(json.load(file))


def sample_domain_factor(rng: np.random.Generator) -> DomainFactor:
    """Uniform over the discrete embodiment sets and the photometric ranges."""
    return DomainFactor(
        fov_group=list(FovGroup)[int(rng.integers(0, len(FovGroup)))],
        rotation_step=int(rng.choice(ROTATION_STEPS)),
        look_step=int(rng.choice(LOOK_STEPS)),
        translation_step=float(rng.choice(TRANSLATION_STEPS)),
        brightness=float(rng.uniform(*BRIGHTNESS_RANGE)),
        contrast=float(rng.uniform(*CONTRAST_RANGE)),
        saturation=float(rng.uniform(*SATURATION_RANGE)),
        hue_shift=float(rng.uniform(*HUE_RANGE)),
    )
