import math

from src.core.consts import SUCCESS_DISTANCE, Action
from src.core.envsim.dynamics import move_ahead
from src.core.envsim.geodesic import geodesic_distance, next_cell, stride_next_cell
from src.core.envsim.sim_typings import AgentState, DomainFactor, GridScene


def angular_error(bearing: float, heading: float) -> float:
    """Signed difference bearing - heading wrapped to (-180, 180]."""
    error = (bearing - heading) % 360.0
    return error - 360.0 if error > 180.0 else error


def stride_cells(scene: GridScene, factor: DomainFactor) -> int:
    return max(1, round(factor.translation_step / scene.cell_size))


def expert_policy(
    scene: GridScene, agent: AgentState, goal: int, factor: DomainFactor
) -> Action:
    """
    Shortest-path planner standing in for the expert.
    End within the success radius; otherwise face the next waypoint and move.
    Waypoints come from a BFS whose moves are one MoveAhead long, so a two-cell
    stride never aims at a cell it would overshoot into a wall.
    When no stride route exists the plain BFS cell is used, and a blocked
    MoveAhead towards it ends the episode.
    """
    if geodesic_distance(scene, (agent.x, agent.y), goal) <= SUCCESS_DISTANCE:
        return Action.End

    cell = scene.cell_of(agent.x, agent.y)
    target = stride_next_cell(scene, cell, goal, stride_cells(scene, factor), SUCCESS_DISTANCE)
    cut_off = target is None
    if cut_off:
        target = next_cell(scene, cell, goal)

    tx, ty = scene.cell_center(*target)
    bearing = math.degrees(math.atan2(ty - agent.y, tx - agent.x))
    error = angular_error(bearing, agent.heading)
    if abs(error) <= factor.rotation_step / 2.0:
        if cut_off and move_ahead(scene, agent, factor.translation_step) == agent:
            return Action.End
        return Action.MoveAhead

    after_left = abs(angular_error(bearing, agent.heading + factor.rotation_step))
    after_right = abs(angular_error(bearing, agent.heading - factor.rotation_step))
    return Action.RotateLeft if after_left <= after_right else Action.RotateRight
