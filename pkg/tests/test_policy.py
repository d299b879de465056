import numpy as np
import pytest
import torch
import torch.nn.functional as F

from src.core.config import PPOConfig
from src.core.consts import N_ACTIONS
from src.core.encoder import PromptFeatureExtractor
from src.core.errors import ContractViolationError
from src.core.logs import read_csv, read_jsonl
from src.core.orchestrator import FusionMode, PromptOrchestrator
from src.core.policy import (
    NavigationPolicy,
    RecurrentActorCritic,
    RolloutBuffer,
    act,
    clipped_surrogate,
    gae,
    merge_reward_curves,
    normalize_advantages,
    ppo_update,
    train_policy,
)


def brute_force_gae(rewards, values, dones, bootstrap, gamma, lam):
    T = len(rewards)
    next_values = np.append(values[1:], bootstrap)
    deltas = rewards + gamma * next_values * (1 - dones) - values
    advantages = np.zeros(T)
    for t in range(T):
        total, weight = 0.0, 1.0
        for l in range(t, T):
            total += weight * deltas[l]
            if dones[l]:
                break
            weight *= gamma * lam
        advantages[t] = total
    return advantages


@pytest.mark.parametrize("seed", range(5))
def test_gae_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    rewards, values = rng.standard_normal(12), rng.standard_normal(12)
    dones = (rng.random(12) < 0.2).astype(float)
    advantages, returns = gae(rewards, values, dones, 0.7, gamma=0.9, lam=0.8)
    np.testing.assert_allclose(advantages, brute_force_gae(rewards, values, dones, 0.7, 0.9, 0.8), atol=1e-12)
    np.testing.assert_allclose(returns, advantages + values)


def test_gae_over_parallel_envs():
    rng = np.random.default_rng(0)
    rewards, values = rng.standard_normal((6, 3)), rng.standard_normal((6, 3))
    dones = np.zeros((6, 3))
    dones[2, 1] = 1
    bootstrap = rng.standard_normal(3)
    advantages, _ = gae(rewards, values, dones, bootstrap, 0.99, 0.95)
    for env in range(3):
        expected = brute_force_gae(rewards[:, env], values[:, env], dones[:, env], bootstrap[env], 0.99, 0.95)
        np.testing.assert_allclose(advantages[:, env], expected, atol=1e-12)


def test_gae_shape_mismatch():
    with pytest.raises(ContractViolationError):
        gae(np.zeros(3), np.zeros(4), np.zeros(3), 0.0)


def test_normalized_advantages():
    normalized = normalize_advantages(np.array([1.0, 2.0, 3.0, 4.0]))
    assert abs(normalized.mean()) < 1e-12
    assert normalized.std() == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize(
    "ratio, advantage, expected",
    [(1.5, 1.0, -1.2), (0.5, 1.0, -0.5), (0.5, -1.0, 0.8), (1.5, -1.0, 1.5), (1.0, 2.0, -2.0)],
)
def test_clipped_surrogate(ratio, advantage, expected):
    loss = clipped_surrogate(torch.tensor([ratio]), torch.tensor([advantage]), 0.2)
    assert loss.item() == pytest.approx(expected)


def test_start_token_is_a_fixed_zero_embedding():
    core = RecurrentActorCritic(d_out=12, hidden=8, action_embedding=4)
    z = torch.zeros(2, 12)
    inputs = core.policy_input(z, torch.tensor([0, 1]), torch.tensor([-1, -1]))
    assert torch.equal(inputs[:, -4:], torch.zeros(2, 4))
    logits, value, hidden = core(z, torch.tensor([0, 1]), torch.tensor([-1, 2]), core.initial_state(2))
    assert logits.shape == (2, N_ACTIONS) and value.shape == (2,) and hidden.shape == (2, 8)


def test_policy_keeps_hidden_state_per_env(tiny_encoder, tiny_pool, frames):
    extractor = PromptFeatureExtractor(tiny_encoder, tiny_pool)
    policy = NavigationPolicy(extractor, PromptOrchestrator(12, 8), RecurrentActorCritic(12, 8, 4))
    policy.reset(2)
    step = policy.step(frames[:2], np.array([0, 1]), deterministic=True)
    assert torch.equal(step.prev_actions, torch.tensor([-1, -1]))
    assert step.alpha.shape == (2, 3)
    policy.reset_env(1)
    assert torch.equal(policy.hidden[1], torch.zeros(8))
    assert policy.prev_actions[1] == -1
    assert policy.prev_actions[0] == step.output.action[0]


def test_buffer_rejects_overflow(tiny_encoder, frames):
    extractor = PromptFeatureExtractor(tiny_encoder)
    policy = NavigationPolicy(extractor, PromptOrchestrator(12, 8, FusionMode.vanilla), RecurrentActorCritic(12, 8, 4))
    policy.reset(1)
    buffer = RolloutBuffer(1, 1, 12, 0, False, 8)
    step = policy.step(frames[:1], np.array([0]))
    args = (torch.tensor([0]), step.prev_actions, step.hidden_in, step.output.action, step.output.log_prob,
            step.output.value, np.zeros(1), np.zeros(1, dtype=bool))
    buffer.add(step.encoded, *args)
    with pytest.raises(ContractViolationError):
        buffer.add(step.encoded, *args)


def test_train_policy_keeps_frozen_modules(scenes, factors, tiny_encoder, tiny_pool, tmp_path):
    extractor = PromptFeatureExtractor(tiny_encoder, tiny_pool)
    before = (tiny_encoder.checksum(), tiny_pool.checksum())
    config = PPOConfig(n_envs=2, rollout_length=4, total_steps=16, epochs=1, minibatches=2, hidden=8, action_embedding=4)
    report = train_policy(
        scenes, factors, extractor, config, FusionMode.dual, seed=0, image_size=16, max_steps=6,
        orchestrator_hidden=8, log_path=tmp_path / "policy.jsonl", curve_path=tmp_path / "curve.csv",
        show_progress=False,
    )
    assert (tiny_encoder.checksum(), tiny_pool.checksum()) == before
    assert report.updates == 2
    assert len(read_csv(tmp_path / "curve.csv")) == 2
    assert [record["update"] for record in read_jsonl(tmp_path / "policy.jsonl")] == [0, 1]


def test_train_policy_is_deterministic(scenes, factors, tiny_encoder):
    extractor = PromptFeatureExtractor(tiny_encoder)
    config = PPOConfig(n_envs=1, rollout_length=4, total_steps=8, epochs=1, minibatches=1, hidden=8, action_embedding=4)
    kwargs = dict(seed=3, image_size=16, max_steps=3, orchestrator_hidden=8, show_progress=False)
    first = train_policy(scenes, factors, extractor, config, FusionMode.vanilla, **kwargs)
    second = train_policy(scenes, factors, extractor, config, FusionMode.vanilla, **kwargs)
    assert first.curve == second.curve
    for a, b in zip(first.core.parameters(), second.core.parameters()):
        assert torch.equal(a, b)


def test_merge_reward_curves():
    merged = merge_reward_curves([[(10, 1.0, 1), (20, None, 0)], [(10, 3.0, 2), (20, None, 0)]])
    assert merged == [(10, 2.0, 1.0)]


def test_act_greedy_and_sampled():
    torch.manual_seed(0)
    core = RecurrentActorCritic(d_out=12, hidden=8, action_embedding=4)
    z = F.normalize(torch.randn(3, 12), dim=-1)
    goals, prev = torch.tensor([0, 5, 11]), torch.tensor([-1, 0, 5])
    hidden = core.initial_state(3)

    greedy = act(core, z, goals, prev, hidden, deterministic=True)
    logits, value, _ = core(z, goals, prev, hidden)
    assert torch.equal(greedy.action, logits.argmax(dim=-1))
    assert torch.allclose(greedy.log_prob, F.log_softmax(logits, dim=-1).gather(-1, greedy.action[:, None]).squeeze(-1))
    assert torch.equal(greedy.value, value)
    assert greedy.hidden.shape == (3, 8)

    first = act(core, z, goals, prev, hidden, generator=torch.Generator().manual_seed(4))
    second = act(core, z, goals, prev, hidden, generator=torch.Generator().manual_seed(4))
    assert torch.equal(first.action, second.action)
    assert bool((first.log_prob <= 0).all())


def test_ppo_update_trains_core_and_projection():
    torch.manual_seed(0)
    rollout, n_envs, d_out, n_domain = 4, 2, 12, 3
    buffer = RolloutBuffer(rollout, n_envs, d_out, n_domain, True, 8)
    buffer.z_v = F.normalize(torch.randn(rollout, n_envs, d_out), dim=-1)
    buffer.z_t = F.normalize(torch.randn(rollout, n_envs, d_out), dim=-1)
    buffer.z_k = F.normalize(torch.randn(rollout, n_envs, n_domain, d_out), dim=-1)
    buffer.goals = torch.randint(0, 12, (rollout, n_envs))
    buffer.prev_actions = torch.randint(-1, N_ACTIONS, (rollout, n_envs))
    buffer.actions = torch.randint(0, N_ACTIONS, (rollout, n_envs))
    buffer.log_probs = torch.full((rollout, n_envs), -float(np.log(N_ACTIONS)))
    buffer.values = torch.randn(rollout, n_envs)
    buffer.rewards = np.random.default_rng(0).normal(size=(rollout, n_envs))
    buffer.position = rollout
    buffer.compute_advantages(np.zeros(n_envs), 0.99, 0.95)

    core, orchestrator = RecurrentActorCritic(d_out, 8, 4), PromptOrchestrator(d_out, 8)
    before_core = [p.detach().clone() for p in core.parameters()]
    before_projection = [p.detach().clone() for p in orchestrator.parameters()]
    optimizer = torch.optim.Adam([*core.parameters(), *orchestrator.parameters()], lr=1e-2)
    config = PPOConfig(epochs=2, minibatches=2)

    report = ppo_update(buffer, core, orchestrator, optimizer, config, np.random.default_rng(0))
    assert all(np.isfinite([report.policy_loss, report.value_loss, report.entropy, report.approx_kl]))
    assert 0.0 <= report.clip_fraction <= 1.0
    assert any(not torch.equal(a, b) for a, b in zip(before_core, core.parameters()))
    assert any(not torch.equal(a, b) for a, b in zip(before_projection, orchestrator.parameters()))


def test_ppo_ratio_is_one_before_any_update_under_feature_noise(tiny_encoder, tiny_pool, frames):
    torch.manual_seed(0)
    extractor = PromptFeatureExtractor(tiny_encoder, tiny_pool)
    orchestrator, core = PromptOrchestrator(12, 8), RecurrentActorCritic(12, 8, 4)
    policy = NavigationPolicy(extractor, orchestrator, core)
    policy.reset(2)
    buffer = RolloutBuffer(3, 2, 12, extractor.n_domain_prompts, extractor.has_text, 8)
    generator = torch.Generator().manual_seed(1)
    goals = np.array([0, 1])
    for t in range(3):
        step = policy.step(frames[2 * t : 2 * t + 2], goals, generator=generator, feature_noise=0.5)
        buffer.add(
            step.encoded, torch.from_numpy(goals), step.prev_actions, step.hidden_in, step.output.action,
            step.output.log_prob, step.output.value, np.ones(2), np.zeros(2, dtype=bool), step.noise,
        )
    buffer.compute_advantages(np.zeros(2), 0.99, 0.95)
    assert buffer.noise.abs().sum() > 0

    optimizer = torch.optim.SGD([*core.parameters(), *orchestrator.parameters()], lr=0.0)
    config = PPOConfig(epochs=1, minibatches=2)
    report = ppo_update(buffer, core, orchestrator, optimizer, config, np.random.default_rng(0))
    assert report.approx_kl == pytest.approx(0.0, abs=1e-5)
    assert report.clip_fraction == 0.0
