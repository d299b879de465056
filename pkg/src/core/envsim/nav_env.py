import math
from typing import Any, Sequence

import gymnasium as gym
import numpy as np
from gymnasium import spaces

from src.core.consts import IMAGE_SIZE, N_ACTIONS, SUCCESS_DISTANCE, T_MAX, Action
from src.core.envsim.dynamics import step
from src.core.envsim.geodesic import distance_field, geodesic_distance
from src.core.envsim.render import render
from src.core.envsim.sim_typings import AgentState, DomainFactor, GridScene


def sample_start(
    rng: np.random.Generator, scene: GridScene, factor: DomainFactor, goal: int
) -> AgentState:
    """Random cell centre farther than the success radius, heading a multiple of ψ."""
    field = distance_field(scene, goal)
    min_hops = math.floor(SUCCESS_DISTANCE / scene.cell_size) + 1
    candidates = np.argwhere(field >= min_hops)
    if len(candidates) == 0:
        candidates = np.argwhere(field >= 1)
    row, col = candidates[int(rng.integers(0, len(candidates)))]
    x, y = scene.cell_center(int(row), int(col))
    n_headings = 360 // factor.rotation_step
    heading = float(int(rng.integers(0, n_headings)) * factor.rotation_step)
    return AgentState(x=x, y=y, heading=heading, pitch=0.0)


def euclidean_to_goal(scene: GridScene, agent: AgentState, goal: int) -> float:
    distances = [
        math.hypot(agent.x - cx, agent.y - cy)
        for cx, cy in (scene.cell_center(*obj.cell) for obj in scene.objects if obj.category == goal)
    ]
    return min(distances)


class NavigationEnv(gym.Env):
    """
    Object-goal navigation over a pool of scenes and domain factors.
    Each reset samples a scene, a factor, a goal category and a start pose
    from the environment's own RNG stream.
    """

    metadata = {"render_modes": ["rgb_array"]}

    def __init__(
        self,
        scenes: Sequence[GridScene],
        factors: Sequence[DomainFactor],
        image_size: int = IMAGE_SIZE,
        max_steps: int = T_MAX,
    ):
        self.scenes = list(scenes)
        self.factors = list(factors)
        self.image_size = image_size
        self.max_steps = min(max_steps, T_MAX)
        self.action_space = spaces.Discrete(N_ACTIONS)
        self.observation_space = spaces.Box(
            low=0, high=255, shape=(3, image_size, image_size), dtype=np.uint8
        )

        self.scene: GridScene | None = None
        self.factor: DomainFactor | None = None
        self.factor_index: int = -1
        self.goal: int = -1
        self.agent: AgentState | None = None
        self._t: int = 0
        self._d_prev: float = 0.0
        self._d_star: float = 0.0
        self._path_length: float = 0.0

    def reset(
        self, *, seed: int | None = None, options: dict[str, Any] | None = None
    ) -> tuple[np.ndarray, dict[str, Any]]:
        super().reset(seed=seed)
        options = options or {}
        rng = self.np_random

        scene_index = options.get("scene_index", int(rng.integers(0, len(self.scenes))))
        self.factor_index = options.get("factor_index", int(rng.integers(0, len(self.factors))))
        self.scene = self.scenes[scene_index]
        self.factor = self.factors[self.factor_index]
        categories = sorted(self.scene.categories)
        self.goal = options.get("goal", categories[int(rng.integers(0, len(categories)))])
        self.agent = options.get("start") or sample_start(rng, self.scene, self.factor, self.goal)

        self._t = 0
        self._d_prev = geodesic_distance(self.scene, (self.agent.x, self.agent.y), self.goal)
        self._d_star = self._d_prev
        self._path_length = 0.0
        return self._observe(), self._info(success=False, moved=0.0)

    def step(self, action: int) -> tuple[np.ndarray, float, bool, bool, dict[str, Any]]:
        outcome = step(
            self.scene, self.agent, action, self.factor, self.goal, self._d_prev, self._t
        )
        self.agent = outcome.next_agent
        self._t += 1
        self._d_prev = outcome.geodesic
        self._path_length += outcome.moved

        terminated = Action(action) == Action.End
        truncated = not terminated and (outcome.done or self._t >= self.max_steps)
        info = self._info(success=outcome.success, moved=outcome.moved)
        return self._observe(), outcome.reward, terminated, truncated, info

    def render(self) -> np.ndarray:
        return np.moveaxis(self._observe(), 0, -1)

    def _observe(self) -> np.ndarray:
        return render(self.scene, self.agent, self.factor, self.image_size).rgb

    def _info(self, success: bool, moved: float) -> dict[str, Any]:
        return {
            "goal": self.goal,
            "factor_index": self.factor_index,
            "geodesic": self._d_prev,
            "d_star": self._d_star,
            "path_length": self._path_length,
            "moved": moved,
            "success": success,
            "steps": self._t,
            "final_distance": euclidean_to_goal(self.scene, self.agent, self.goal),
        }
