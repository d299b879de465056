from dataclasses import dataclass
from pathlib import Path

import numpy as np

from src.core.consts import BACKGROUND_COLOR, IMAGE_SIZE, MAX_PITCH, WALL_COLOR
from src.core.envsim.photometric import apply_photometric
from src.core.envsim.sim_typings import AgentState, DomainFactor, GridScene, Observation

WALL_HEIGHT = 1.0
CAMERA_HEIGHT = 0.5
MIN_DEPTH = 0.05
SAMPLES_PER_CELL = 16


@dataclass(frozen=True)
class RayHits:
    """
    First hits along each column ray.
    Parameters:
    - wall_distance - meters to the first wall, inf when the ray leaves the grid
    - object_distance - meters to the first object in front of that wall, inf when none
    - object_index - index into scene.objects, -1 when none
    """

    wall_distance: np.ndarray
    object_distance: np.ndarray
    object_index: np.ndarray


def column_angles(heading: float, fov: float, width: int) -> np.ndarray:
    """
    Ray angle per column, heading + fov/2 - i * fov/width. Column width // 2 looks straight along
    the heading, so with even widths the central half of a wide view hits the same angles as the
    even columns of a narrow view at half the FOV.
    """
    offsets = fov / 2.0 - np.arange(width) * (fov / width)
    return heading + offsets


def cast_rays(scene: GridScene, agent: AgentState, angles_deg: np.ndarray) -> RayHits:
    """March every ray through the grid in steps of cell_size / 16."""
    step = scene.cell_size / SAMPLES_PER_CELL
    max_distance = np.hypot(scene.width, scene.height) * scene.cell_size
    n_samples = int(np.ceil(max_distance / step))
    distances = (np.arange(n_samples) + 1) * step

    radians = np.deg2rad(angles_deg)
    xs = agent.x + np.cos(radians)[:, None] * distances[None, :]
    ys = agent.y + np.sin(radians)[:, None] * distances[None, :]
    cols = np.floor(xs / scene.cell_size).astype(np.int64)
    rows = np.floor(ys / scene.cell_size).astype(np.int64)

    inside = (rows >= 0) & (rows < scene.height) & (cols >= 0) & (cols < scene.width)
    safe_rows = np.where(inside, rows, 0)
    safe_cols = np.where(inside, cols, 0)
    is_wall = inside & scene.walls[safe_rows, safe_cols]
    object_ids = np.where(inside, scene.object_grid[safe_rows, safe_cols], -1)
    rays = np.arange(len(angles_deg))

    # Everything past the first wall or the grid edge is hidden.
    blocked = is_wall | ~inside
    any_block = blocked.any(axis=1)
    first_block = np.where(any_block, blocked.argmax(axis=1), n_samples)
    last_sample = np.minimum(first_block, n_samples - 1)
    hit_wall = any_block & is_wall[rays, last_sample]
    wall_distance = np.where(hit_wall, distances[last_sample], np.inf)

    visible = (object_ids >= 0) & (np.arange(n_samples)[None, :] < first_block[:, None])
    has_object = visible.any(axis=1)
    first_object = visible.argmax(axis=1)
    object_distance = np.where(has_object, distances[first_object], np.inf)
    object_index = np.where(has_object, object_ids[rays, first_object], -1)
    return RayHits(wall_distance, object_distance, object_index)


def horizon_row(pitch: float, height: int) -> float:
    return height / 2.0 + (pitch / MAX_PITCH) * (height / 2.0)


def render(
    scene: GridScene,
    agent: AgentState,
    factor: DomainFactor,
    image_size: int = IMAGE_SIZE,
) -> Observation:
    """
    Egocentric column ray-cast image.
    Slices are shaded by 1 / (1 + distance); pitch shifts the horizon; photometrics last.
    """
    agent.validate(scene, factor)
    height = width = image_size
    hits = cast_rays(scene, agent, column_angles(agent.heading, factor.fov, width))

    image = np.empty((height, width, 3), dtype=np.float64)
    image[:] = np.asarray(BACKGROUND_COLOR, dtype=np.float64)
    row_centers = np.arange(height)[:, None] + 0.5
    focal = height / 2.0
    horizon = horizon_row(agent.pitch, height)

    wall_depth = np.maximum(hits.wall_distance, MIN_DEPTH)
    floor_line = horizon + focal * CAMERA_HEIGHT / wall_depth
    wall_top = floor_line - focal * WALL_HEIGHT / wall_depth
    wall_mask = (row_centers >= wall_top[None, :]) & (row_centers < floor_line[None, :])
    wall_mask &= np.isfinite(hits.wall_distance)[None, :]
    wall_shade = np.asarray(WALL_COLOR, dtype=np.float64)[None, :] / (1.0 + wall_depth[:, None])
    image = np.where(wall_mask[..., None], wall_shade[None, :, :], image)

    if len(scene.objects) > 0:
        colors = np.asarray([obj.color for obj in scene.objects], dtype=np.float64)
        sizes = np.asarray([obj.size for obj in scene.objects], dtype=np.float64)
        has_object = hits.object_index >= 0
        index = np.where(has_object, hits.object_index, 0)
        object_depth = np.where(has_object, np.maximum(hits.object_distance, MIN_DEPTH), 1.0)
        object_floor = horizon + focal * CAMERA_HEIGHT / object_depth
        object_top = object_floor - focal * sizes[index] / object_depth
        object_mask = (row_centers >= object_top[None, :]) & (row_centers < object_floor[None, :])
        object_mask &= has_object[None, :]
        object_shade = colors[index] / (1.0 + object_depth[:, None])
        image = np.where(object_mask[..., None], object_shade[None, :, :], image)

    rgb = np.round(np.clip(image, 0.0, 255.0)).astype(np.uint8)
    observation = Observation(np.ascontiguousarray(np.moveaxis(rgb, -1, 0)))
    return apply_photometric(observation, *factor.photometric)


def export_ppm(observation: Observation, path: Path | str) -> Path:
    """Write a binary P6 image for debugging."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    _, height, width = observation.rgb.shape
    with path.open("wb") as file:
        file.write(f"P6\n{width} {height}\n255\n".encode("ascii"))
        file.write(np.moveaxis(observation.rgb, 0, -1).tobytes())
    return path
