import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import torch
from tqdm import tqdm

from src.core.config import PPOConfig
from src.core.encoder.features import PromptFeatureExtractor
from src.core.envsim.nav_env import NavigationEnv
from src.core.envsim.sim_typings import DomainFactor, GridScene
from src.core.logs import JsonlWriter, write_csv
from src.core.orchestrator.attention import FusionMode, PromptOrchestrator
from src.core.policy.agent import NavigationPolicy
from src.core.policy.buffer import RolloutBuffer
from src.core.policy.ppo import ppo_update
from src.core.policy.recurrent import RecurrentActorCritic
from src.core.seeding import keyed_generator, keyed_seed

CURVE_HEADER = ("env_steps", "mean_reward", "episodes")


@dataclass
class PolicyTrainingReport:
    """
    Outcome of PPO training.
    Parameters:
    - core - recurrent actor-critic
    - orchestrator - fusion module holding f_p
    - curve - (env_steps, mean episodic reward or None, finished episodes) per update
    """

    core: RecurrentActorCritic
    orchestrator: PromptOrchestrator
    curve: list[tuple[int, float | None, int]] = field(default_factory=list)
    updates: int = 0
    episodes: int = 0


def linear_lr(config: PPOConfig, update: int, n_updates: int) -> float:
    progress = update / max(n_updates, 1)
    return config.lr_final + (config.lr - config.lr_final) * (1.0 - progress)


def train_policy(
    scenes: Sequence[GridScene],
    factors: Sequence[DomainFactor],
    extractor: PromptFeatureExtractor,
    config: PPOConfig,
    fusion: FusionMode,
    seed: int,
    image_size: int,
    max_steps: int,
    orchestrator_hidden: int = 128,
    log_path: Path | str | None = None,
    curve_path: Path | str | None = None,
    show_progress: bool = True,
    config_digest: str | None = None,
) -> PolicyTrainingReport:
    """
    Recurrent PPO over n_envs navigation environments with per-environment RNG streams.
    Only the core and the orchestrator's f_p are optimised; the extractor stays frozen.
    """
    torch.manual_seed(seed)
    orchestrator = PromptOrchestrator(extractor.d_out, orchestrator_hidden, fusion)
    core = RecurrentActorCritic(extractor.d_out, config.hidden, config.action_embedding)
    policy = NavigationPolicy(extractor, orchestrator, core)
    optimizer = torch.optim.Adam([*core.parameters(), *orchestrator.parameters()], lr=config.lr)
    report = PolicyTrainingReport(core=core, orchestrator=orchestrator)

    envs = [NavigationEnv(scenes, factors, image_size, max_steps) for _ in range(config.n_envs)]
    frames, goals = [], []
    for i, env in enumerate(envs):
        observation, _ = env.reset(seed=keyed_seed(seed, i))
        frames.append(observation)
        goals.append(env.goal)
    frames, goals = np.stack(frames), np.asarray(goals, dtype=np.int64)
    policy.reset(config.n_envs)

    buffer = RolloutBuffer(
        config.rollout_length,
        config.n_envs,
        extractor.d_out,
        extractor.n_domain_prompts,
        extractor.has_text,
        config.hidden,
    )
    generator = keyed_generator(seed, 3)
    rng = np.random.default_rng([seed, 4])
    steps_per_update = config.n_envs * config.rollout_length
    n_updates = max(1, math.ceil(config.total_steps / steps_per_update))
    returns = np.zeros(config.n_envs, dtype=np.float64)
    env_steps = 0

    logging.info(
        f"Policy training: {n_updates} updates of {steps_per_update} steps, fusion {fusion.value}"
    )
    with JsonlWriter(log_path, config_digest) as writer:
        for update in tqdm(range(n_updates), desc="policy", disable=not show_progress):
            lr = linear_lr(config, update, n_updates)
            for group in optimizer.param_groups:
                group["lr"] = lr

            buffer.reset()
            finished: list[float] = []
            for _ in range(config.rollout_length):
                step_goals = goals.copy()
                step = policy.step(frames, step_goals, generator=generator, feature_noise=config.feature_noise)
                actions = step.output.action.numpy()
                rewards = np.zeros(config.n_envs, dtype=np.float64)
                dones = np.zeros(config.n_envs, dtype=bool)
                for i, env in enumerate(envs):
                    observation, reward, terminated, truncated, _ = env.step(int(actions[i]))
                    rewards[i], dones[i] = reward, terminated or truncated
                    returns[i] += reward
                    if dones[i]:
                        finished.append(returns[i])
                        returns[i] = 0.0
                        observation, _ = env.reset()
                        policy.reset_env(i)
                    frames[i], goals[i] = observation, env.goal
                buffer.add(
                    step.encoded,
                    torch.from_numpy(step_goals),
                    step.prev_actions,
                    step.hidden_in,
                    step.output.action,
                    step.output.log_prob,
                    step.output.value,
                    rewards,
                    dones,
                    step.noise,
                )

            buffer.compute_advantages(policy.value(frames, goals), config.gamma, config.gae_lambda)
            ppo = ppo_update(buffer, core, orchestrator, optimizer, config, rng)
            env_steps += steps_per_update
            mean_reward = float(np.mean(finished)) if finished else None
            report.curve.append((env_steps, mean_reward, len(finished)))
            report.updates += 1
            report.episodes += len(finished)
            writer.write(
                {
                    "update": update,
                    "env_steps": env_steps,
                    "lr": lr,
                    "mean_reward": mean_reward,
                    "episodes": len(finished),
                    "policy_loss": ppo.policy_loss,
                    "value_loss": ppo.value_loss,
                    "entropy": ppo.entropy,
                    "approx_kl": ppo.approx_kl,
                    "clip_fraction": ppo.clip_fraction,
                }
            )

    if curve_path is not None:
        write_csv(curve_path, CURVE_HEADER, report.curve, config_digest)
    logging.info(f"Policy training finished: {report.episodes} episodes over {env_steps} steps")
    return report


def merge_reward_curves(curves: Sequence[Sequence[tuple[int, float | None, int]]]) -> list[tuple[int, float, float]]:
    """Align per-seed curves by update index -> (env_steps, mean, std over seeds with data)."""
    merged = []
    for points in zip(*curves):
        values = [p[1] for p in points if p[1] is not None]
        if not values:
            continue
        merged.append((points[0][0], float(np.mean(values)), float(np.std(values))))
    return merged
