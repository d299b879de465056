import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from tqdm import tqdm

from src.core.consts import IMAGE_SIZE, T_MAX
from src.core.envsim.dynamics import step
from src.core.envsim.geodesic import geodesic_distance
from src.core.envsim.nav_env import sample_start
from src.core.envsim.render import render
from src.core.envsim.sim_typings import AgentState, DomainFactor, GridScene
from src.core.errors import CollectionError, ContractViolationError
from src.core.expert_data.data_typings import AlignmentPair, DatasetManifest, Trajectory
from src.core.expert_data.expert import expert_policy
from src.core.expert_data.presence import f1_score, presence_vector

ATTEMPTS_PER_TRAJECTORY = 3


@dataclass(frozen=True)
class EpisodeTask:
    factor_id: int
    episode: int
    seed: int
    shared_starts: bool
    image_size: int
    max_steps: int


def episode_rng(task: EpisodeTask) -> np.random.Generator:
    if task.shared_starts:
        return np.random.default_rng([task.seed, task.episode])
    return np.random.default_rng([task.seed, task.factor_id, task.episode])


def run_expert_episode(
    task: EpisodeTask, scenes: Sequence[GridScene], factor: DomainFactor
) -> Trajectory | None:
    """Roll the expert out once; None when it does not succeed within the horizon."""
    rng = episode_rng(task)
    scene_index = int(rng.integers(0, len(scenes)))
    scene = scenes[scene_index]
    categories = sorted(scene.categories)
    goal = categories[int(rng.integers(0, len(categories)))]
    start = sample_start(rng, scene, factor, goal)

    agent = start
    d_prev = geodesic_distance(scene, (agent.x, agent.y), goal)
    frames, presences, actions, rewards, dones = [], [], [], [], []
    for t in range(task.max_steps):
        frames.append(render(scene, agent, factor, task.image_size).rgb)
        presences.append(presence_vector(scene, agent, factor, task.image_size))
        action = expert_policy(scene, agent, goal, factor)
        outcome = step(scene, agent, action, factor, goal, d_prev, t)
        actions.append(int(action))
        rewards.append(outcome.reward)
        dones.append(outcome.done)
        agent, d_prev = outcome.next_agent, outcome.geodesic
        if outcome.done:
            if not outcome.success:
                return None
            break
    else:
        return None

    return Trajectory(
        factor_id=task.factor_id,
        goal=goal,
        scene_index=scene_index,
        start=start,
        actions=np.asarray(actions, dtype=np.int64),
        rewards=np.asarray(rewards, dtype=np.float64),
        dones=np.asarray(dones, dtype=bool),
        frames=np.stack(frames),
        presences=np.stack(presences),
    )


def replay_trajectory(
    trajectory: Trajectory, scenes: Sequence[GridScene], factor: DomainFactor
) -> tuple[np.ndarray, np.ndarray]:
    """Re-execute the stored actions and return the (rewards, dones) sequences."""
    scene = scenes[trajectory.scene_index]
    agent = trajectory.start
    d_prev = geodesic_distance(scene, (agent.x, agent.y), trajectory.goal)
    rewards, dones = [], []
    for t, action in enumerate(trajectory.actions):
        outcome = step(scene, agent, int(action), factor, trajectory.goal, d_prev, t)
        rewards.append(outcome.reward)
        dones.append(outcome.done)
        agent, d_prev = outcome.next_agent, outcome.geodesic
    return np.asarray(rewards, dtype=np.float64), np.asarray(dones, dtype=bool)


def replay_states(
    trajectory: Trajectory, scenes: Sequence[GridScene], factor: DomainFactor
) -> list[AgentState]:
    """Agent pose in front of every stored frame."""
    scene = scenes[trajectory.scene_index]
    agent = trajectory.start
    d_prev = geodesic_distance(scene, (agent.x, agent.y), trajectory.goal)
    states = []
    for t, action in enumerate(trajectory.actions):
        states.append(agent)
        outcome = step(scene, agent, int(action), factor, trajectory.goal, d_prev, t)
        agent, d_prev = outcome.next_agent, outcome.geodesic
    return states


def _collect_factor(
    factor_id: int,
    factor: DomainFactor,
    scenes: Sequence[GridScene],
    n_per_factor: int,
    seed: int,
    shared_starts: bool,
    image_size: int,
    max_steps: int,
) -> tuple[list[Trajectory], int]:
    trajectories, failures = [], 0
    for episode in range(n_per_factor * ATTEMPTS_PER_TRAJECTORY):
        task = EpisodeTask(factor_id, episode, seed, shared_starts, image_size, max_steps)
        trajectory = run_expert_episode(task, scenes, factor)
        if trajectory is None:
            failures += 1
            continue
        trajectories.append(trajectory)
        if len(trajectories) == n_per_factor:
            break
    return trajectories, failures


def align_trajectories(
    trajectories: dict[int, list[Trajectory]], kappa: float
) -> list[AlignmentPair]:
    """
    Pair each base-factor trajectory with the same-goal trajectory of maximal F1
    under every other factor, kept when F1 >= kappa (ties -> lowest index).
    """
    if not trajectories:
        return []
    base_factor = min(trajectories)
    pairs = []
    for base_index, base in enumerate(trajectories[base_factor]):
        for factor_id in sorted(trajectories):
            if factor_id == base_factor:
                continue
            best_index, best_f1 = -1, -1.0
            for other_index, other in enumerate(trajectories[factor_id]):
                if other.goal != base.goal:
                    continue
                score = f1_score(base.presence, other.presence)
                if score > best_f1:
                    best_index, best_f1 = other_index, score
            if best_index >= 0 and best_f1 >= kappa:
                pairs.append(AlignmentPair(base_index, factor_id, best_index, best_f1))
    return pairs


def collect_and_align(
    scenes: Sequence[GridScene],
    factors: Sequence[DomainFactor],
    n_per_factor: int,
    kappa: float,
    seed: int,
    shared_starts: bool = False,
    n_workers: int = 1,
    image_size: int = IMAGE_SIZE,
    max_steps: int = T_MAX,
    show_progress: bool = True,
) -> DatasetManifest:
    """Collect expert trajectories per factor and align them against the first factor."""
    if not (0.0 < kappa <= 1.0):
        raise ContractViolationError(f"kappa must lie in (0, 1], got {kappa}")
    if not factors:
        raise ContractViolationError("at least one domain factor is required")

    jobs = [
        (factor_id, factor, scenes, n_per_factor, seed, shared_starts, image_size, max_steps)
        for factor_id, factor in enumerate(factors)
    ]
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            futures = [pool.submit(_collect_factor, *job) for job in jobs]
            results = [future.result() for future in tqdm(futures, desc="collect", disable=not show_progress)]
    else:
        results = [_collect_factor(*job) for job in tqdm(jobs, desc="collect", disable=not show_progress)]

    trajectories = {}
    for factor_id, (items, failures) in enumerate(results):
        if not items:
            raise CollectionError(f"expert never succeeded under factor {factor_id}")
        logging.info(
            f"Factor {factor_id}: {len(items)} trajectories, {failures} failed expert episodes"
        )
        trajectories[factor_id] = items

    manifest = DatasetManifest(
        factors=list(factors),
        scenes=list(scenes),
        trajectories=trajectories,
        pairs=align_trajectories(trajectories, kappa),
        kappa=kappa,
    )
    logging.info(f"Collected dataset: {manifest.counts}")
    return manifest
