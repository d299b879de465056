import math

from src.core.consts import (
    MAX_PITCH,
    STEP_PENALTY,
    SUCCESS_DISTANCE,
    SUCCESS_REWARD,
    T_MAX,
    Action,
)
from src.core.envsim.geodesic import geodesic_distance
from src.core.envsim.sim_typings import AgentState, DomainFactor, GridScene, StepOutcome
from src.core.errors import ContractViolationError

COLLISION_SAMPLES = 8


def move_ahead(scene: GridScene, agent: AgentState, distance: float) -> AgentState:
    """Advance along the heading; a blocked segment leaves the agent in place."""
    radians = math.radians(agent.heading)
    dx, dy = math.cos(radians), math.sin(radians)
    for i in range(1, COLLISION_SAMPLES + 1):
        fraction = distance * i / COLLISION_SAMPLES
        if not scene.is_free(agent.x + dx * fraction, agent.y + dy * fraction):
            return agent
    return AgentState(
        x=agent.x + dx * distance,
        y=agent.y + dy * distance,
        heading=agent.heading,
        pitch=agent.pitch,
    )


def transition(
    scene: GridScene, agent: AgentState, action: Action, factor: DomainFactor
) -> AgentState:
    match action:
        case Action.MoveAhead:
            return move_ahead(scene, agent, factor.translation_step)
        case Action.RotateLeft:
            heading = (agent.heading + factor.rotation_step) % 360
            return AgentState(agent.x, agent.y, float(heading), agent.pitch)
        case Action.RotateRight:
            heading = (agent.heading - factor.rotation_step) % 360
            return AgentState(agent.x, agent.y, float(heading), agent.pitch)
        case Action.LookUp:
            pitch = min(agent.pitch + factor.look_step, MAX_PITCH)
            return AgentState(agent.x, agent.y, agent.heading, float(pitch))
        case Action.LookDown:
            pitch = max(agent.pitch - factor.look_step, -MAX_PITCH)
            return AgentState(agent.x, agent.y, agent.heading, float(pitch))
        case Action.End:
            return agent
    raise ContractViolationError(f"unknown action {action!r}")


def step(
    scene: GridScene,
    agent: AgentState,
    action: Action | int,
    factor: DomainFactor,
    goal: int,
    d_prev: float,
    t: int,
) -> StepOutcome:
    """
    One environment transition.
    reward = clamp(d_prev - d_curr, -moved, moved) + STEP_PENALTY + SUCCESS_REWARD * success
    """
    try:
        action = Action(action)
    except ValueError as error:
        raise ContractViolationError(f"unknown action id {action!r}") from error
    if not (0 <= t < T_MAX):
        raise ContractViolationError(f"step index {t} outside [0, {T_MAX})")
    agent.validate(scene, factor)

    next_agent = transition(scene, agent, action, factor)
    moved = math.hypot(next_agent.x - agent.x, next_agent.y - agent.y)
    d_curr = geodesic_distance(scene, (next_agent.x, next_agent.y), goal)

    shaped = min(max(d_prev - d_curr, -moved), moved)
    success = action == Action.End and d_curr <= SUCCESS_DISTANCE
    reward = shaped + STEP_PENALTY + (SUCCESS_REWARD if success else 0.0)
    done = action == Action.End or t + 1 >= T_MAX
    return StepOutcome(
        next_agent=next_agent,
        reward=reward,
        done=done,
        success=success,
        geodesic=d_curr,
        moved=moved,
    )
