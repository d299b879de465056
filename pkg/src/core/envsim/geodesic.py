from collections import deque

import numpy as np

from src.core.envsim.sim_typings import GridScene
from src.core.errors import InvalidStateError, MissingGoalError, PlanningError

NEIGHBOURS = ((-1, 0), (1, 0), (0, -1), (0, 1))


def goal_cells(scene: GridScene, goal: int) -> list[tuple[int, int]]:
    """Traversable cells 4-adjacent to any instance of the goal category."""
    if goal not in scene.categories:
        raise MissingGoalError(f"category {goal} is not present in the scene")
    targets = []
    for obj in scene.objects:
        if obj.category != goal:
            continue
        row, col = obj.cell
        for dr, dc in NEIGHBOURS:
            r, c = row + dr, col + dc
            if scene.in_bounds(r, c) and scene.traversable[r, c] and (r, c) not in targets:
                targets.append((r, c))
    return targets


def distance_field(scene: GridScene, goal: int) -> np.ndarray:
    """
    Hop counts from every traversable cell to the nearest goal-adjacent cell.
    Multi-source BFS over 4-connected traversable cells; -1 where unreachable.
    """
    key = ("distance_field", goal)
    if key in scene._cache:
        return scene._cache[key]

    field = np.full((scene.height, scene.width), -1, dtype=np.int64)
    queue = deque()
    for cell in goal_cells(scene, goal):
        field[cell] = 0
        queue.append(cell)

    while queue:
        row, col = queue.popleft()
        for dr, dc in NEIGHBOURS:
            r, c = row + dr, col + dc
            if scene.in_bounds(r, c) and scene.traversable[r, c] and field[r, c] < 0:
                field[r, c] = field[row, col] + 1
                queue.append((r, c))

    field.setflags(write=False)
    scene._cache[key] = field
    return field


def geodesic_distance(scene: GridScene, position: tuple[float, float], goal: int) -> float:
    """Shortest obstacle-respecting path length in meters from position to the goal."""
    x, y = position
    if not scene.is_free(x, y):
        raise InvalidStateError(f"position ({x:.3f}, {y:.3f}) is not in free space")
    hops = distance_field(scene, goal)[scene.cell_of(x, y)]
    if hops < 0:
        raise PlanningError(f"category {goal} is unreachable from ({x:.3f}, {y:.3f})")
    return float(hops) * scene.cell_size


def next_cell(scene: GridScene, cell: tuple[int, int], goal: int) -> tuple[int, int] | None:
    """Neighbour one hop closer to the goal, None when already adjacent."""
    field = distance_field(scene, goal)
    hops = field[cell]
    if hops < 0:
        raise PlanningError(f"category {goal} is unreachable from cell {cell}")
    if hops == 0:
        return None
    row, col = cell
    for dr, dc in NEIGHBOURS:
        r, c = row + dr, col + dc
        if scene.in_bounds(r, c) and field[r, c] == hops - 1:
            return r, c
    raise PlanningError(f"distance field is inconsistent at cell {cell}")


def stride_field(scene: GridScene, goal: int, stride: int, radius: float) -> np.ndarray:
    """
    Move counts over straight `stride`-cell jumps along rows and columns to the
    nearest cell whose geodesic is within `radius`; -1 where no jump sequence gets there.
    A jump is allowed when every cell it crosses is traversable.
    """
    key = ("stride_field", goal, stride, radius)
    if key in scene._cache:
        return scene._cache[key]

    hops = distance_field(scene, goal)
    reached = (hops >= 0) & (hops * scene.cell_size <= radius + 1e-9)
    field = np.where(reached, 0, -1).astype(np.int64)
    queue = deque(tuple(int(v) for v in cell) for cell in np.argwhere(reached))

    while queue:
        row, col = queue.popleft()
        for dr, dc in NEIGHBOURS:
            r, c = row + dr * stride, col + dc * stride
            if scene.in_bounds(r, c) and field[r, c] < 0 and _segment_free(scene, row, col, dr, dc, stride):
                field[r, c] = field[row, col] + 1
                queue.append((r, c))

    field.setflags(write=False)
    scene._cache[key] = field
    return field


def _segment_free(scene: GridScene, row: int, col: int, dr: int, dc: int, stride: int) -> bool:
    for k in range(1, stride + 1):
        r, c = row + dr * k, col + dc * k
        if not (scene.in_bounds(r, c) and scene.traversable[r, c]):
            return False
    return True


def stride_next_cell(
    scene: GridScene, cell: tuple[int, int], goal: int, stride: int, radius: float
) -> tuple[int, int] | None:
    """Landing cell of the first jump on a shortest stride route, None when inside the radius or cut off."""
    field = stride_field(scene, goal, stride, radius)
    moves = field[cell]
    if moves <= 0:
        return None
    row, col = cell
    for dr, dc in NEIGHBOURS:
        r, c = row + dr * stride, col + dc * stride
        if scene.in_bounds(r, c) and field[r, c] == moves - 1 and _segment_free(scene, row, col, dr, dc, stride):
            return r, c
    raise PlanningError(f"stride field is inconsistent at cell {cell}")
