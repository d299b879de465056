import logging
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from src.core.envsim.nav_env import NavigationEnv
from src.core.envsim.sim_typings import DomainFactor, GridScene
from src.core.errors import ContractViolationError
from src.core.evalkit.metrics import EpisodeRecord, aggregate, summarize
from src.core.evalkit.splits import DomainSplit, SplitName
from src.core.policy.agent import NavigationPolicy
from src.core.seeding import keyed_seed


@dataclass
class SplitResult:
    """Episode records of one split, one list per evaluation seed."""

    name: str
    records: list[list[EpisodeRecord]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return aggregate([summarize(seed_records) for seed_records in self.records])


def run_episode(
    policy: NavigationPolicy,
    env: NavigationEnv,
    seed: int,
    factor_index: int,
    alphas: list[np.ndarray] | None = None,
) -> EpisodeRecord:
    """Deterministic (argmax) rollout of a single episode; α rows are appended to `alphas`."""
    observation, info = env.reset(seed=seed, options={"factor_index": factor_index})
    policy.reset(1)
    done = False
    while not done:
        step = policy.step(observation[None], np.asarray([env.goal]), deterministic=True)
        if alphas is not None:
            alphas.append(step.alpha[0].numpy())
        observation, _, terminated, truncated, info = env.step(int(step.output.action[0]))
        done = terminated or truncated
    return EpisodeRecord.from_info(info)


def evaluate_factors(
    policy: NavigationPolicy,
    scenes: Sequence[GridScene],
    factors: Sequence[DomainFactor],
    episodes_per_domain: int,
    seed: int,
    image_size: int,
    max_steps: int,
    split_key: int = 0,
) -> list[EpisodeRecord]:
    """Every factor gets the same number of episodes; episode RNG is keyed by (seed, split, factor, episode)."""
    if not factors:
        raise ContractViolationError("cannot evaluate an empty split")
    env = NavigationEnv(scenes, factors, image_size, max_steps)
    records = []
    for factor_index in range(len(factors)):
        for episode in range(episodes_per_domain):
            episode_seed = keyed_seed(seed, split_key, factor_index, episode)
            records.append(run_episode(policy, env, episode_seed, factor_index))
    return records


def evaluate(
    policy: NavigationPolicy,
    scenes: Sequence[GridScene],
    split: DomainSplit,
    episodes_per_domain: int,
    seed: int,
    n_seeds: int = 3,
    splits: Sequence[SplitName] = ("source", "seen", "unseen"),
    image_size: int = 48,
    max_steps: int = 500,
) -> dict[str, dict[str, Any]]:
    """
    Metrics report {split: {SR, SPL, NE, EL}}, each {mean, std, per_seed} over n_seeds
    evaluation seeds derived from `seed`. Empty splits raise.
    """
    report = {}
    for split_key, name in enumerate(splits):
        result = SplitResult(name)
        for offset in range(n_seeds):
            result.records.append(
                evaluate_factors(
                    policy,
                    scenes,
                    split.factors(name),
                    episodes_per_domain,
                    seed + offset,
                    image_size,
                    max_steps,
                    split_key,
                )
            )
        report[name] = result.to_dict()
        logging.info(
            f"Split {name}: SR {report[name]['SR']['mean']:.1f} SPL {report[name]['SPL']['mean']:.3f}"
        )
    return report


def trace_alphas(
    policy: NavigationPolicy,
    scenes: Sequence[GridScene],
    factors: Sequence[DomainFactor],
    n_steps: int,
    seed: int,
    image_size: int,
    max_steps: int,
) -> np.ndarray:
    """Per-step α of consecutive deterministic episodes, cycling factors, until n_steps rows exist."""
    if not factors:
        raise ContractViolationError("cannot trace attention over an empty split")
    env = NavigationEnv(scenes, factors, image_size, max_steps)
    alphas: list[np.ndarray] = []
    episode = 0
    while len(alphas) < n_steps:
        before = len(alphas)
        run_episode(policy, env, keyed_seed(seed, 9, episode), episode % len(factors), alphas)
        if len(alphas) == before:
            break
        episode += 1
    width = alphas[0].shape[0] if alphas else 0
    return np.asarray(alphas[:n_steps], dtype=np.float64).reshape(-1, width)
