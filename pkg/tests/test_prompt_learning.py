import numpy as np
import pytest
import torch
import torch.nn.functional as F

from src.core.config import LossConfig, PromptsConfig
from src.core.encoder import PromptedViT, PromptPool, PromptRole, text_anchor_table
from src.core.errors import AugmentorConfigError, ContractViolationError, SamplingError
from src.core.prompt_learning import (
    ActionPairSampler,
    OnlineTargetPair,
    PhotometricAugmentor,
    Views,
    action_loss,
    augmentation_alignment,
    byol_regression,
    infonce_symmetric,
    momentum_update,
    text_loss,
    train_prompts,
    visual_loss,
)
from src.core.prompt_learning.augment import alignment_groups
from src.core.prompt_learning.losses import text_alignment_loss


@pytest.fixture
def double_setup():
    torch.manual_seed(1)
    encoder = PromptedViT(image_size=16, patch_size=8, hidden=16, layers=1, heads=2, d_out=12).double().freeze()
    pool = PromptPool.from_layout(n_prompts=4, length=2, prompt_dim=8, hidden=16, seed=1).double()
    return encoder, pool


def finite_difference_check(loss_fn, parameter, n_coordinates=20, eps=1e-6, seed=0):
    """Central differences on random coordinates against autograd, relative error <= 1e-3."""
    parameter.grad = None
    loss_fn().backward()
    analytic = parameter.grad.detach().clone().flatten()
    rng = np.random.default_rng(seed)
    flat = parameter.data.view(-1)
    for index in map(int, rng.choice(flat.numel(), size=min(n_coordinates, flat.numel()), replace=False)):
        original = flat[index].item()
        flat[index] = original + eps
        plus = loss_fn().item()
        flat[index] = original - eps
        minus = loss_fn().item()
        flat[index] = original
        numeric = (plus - minus) / (2 * eps)
        scale = max(abs(numeric), abs(analytic[index].item()))
        assert abs(numeric - analytic[index].item()) <= 1e-3 * scale + 1e-7


def unit(rows):
    return F.normalize(torch.as_tensor(rows, dtype=torch.float64), dim=-1)


def test_infonce_single_pair_is_zero():
    z = unit(np.random.default_rng(0).standard_normal((1, 12)))
    assert infonce_symmetric(z, z.clone()).item() == 0.0


def test_infonce_rejects_bad_input():
    with pytest.raises(ContractViolationError):
        infonce_symmetric(torch.ones(2, 3), torch.ones(2, 3))
    with pytest.raises(ContractViolationError):
        infonce_symmetric(unit(np.ones((2, 3))), unit(np.ones((3, 3))))


def test_infonce_prefers_matching_pairs(rng):
    z = unit(rng.standard_normal((8, 12)))
    shuffled = z[torch.randperm(8, generator=torch.Generator().manual_seed(0))]
    assert infonce_symmetric(z, z) < infonce_symmetric(z, shuffled)


def test_byol_aligned_pair_is_zero(rng):
    online = torch.as_tensor(rng.standard_normal((4, 16)))
    target = online.clone()
    assert byol_regression(online, target, online, target).item() == 0.0


def test_momentum_update_extremes():
    target = [torch.ones(3), torch.zeros(2)]
    online = [torch.full((3,), 5.0), torch.ones(2)]
    momentum_update(target, online, beta=1.0)
    assert torch.equal(target[0], torch.ones(3)) and torch.equal(target[1], torch.zeros(2))
    momentum_update(target, online, beta=0.0)
    assert torch.equal(target[0], online[0]) and torch.equal(target[1], online[1])
    with pytest.raises(ContractViolationError):
        momentum_update([torch.ones(3)], [torch.ones(4)], 0.5)


def test_target_projector_gets_no_gradient():
    nets = OnlineTargetPair(d_out=12, hidden=16)
    z = torch.randn(4, 12)
    (nets.online(z).sum() + nets.target(z).sum()).backward()
    assert all(p.grad is None for p in nets.target_projector.parameters())
    assert all(p.grad is not None for p in nets.projector.parameters())


def test_text_loss_without_noise_equals_noiseless_alignment(double_setup, frames):
    encoder, pool = double_setup
    anchors = torch.as_tensor(text_anchor_table(0, 12))
    goals = torch.arange(len(frames)) % 12
    index = pool.text_index
    with torch.no_grad():
        loss = text_loss(encoder, pool, index, torch.from_numpy(frames), goals, anchors, 0.0, 1.0)
        z = encoder(torch.from_numpy(frames).double() / 255.0, pool.tokens(index))
        expected = text_alignment_loss(z, anchors[goals], 1.0)
    assert loss.item() == expected.item()
    with pytest.raises(ContractViolationError):
        text_loss(encoder, pool, index, torch.from_numpy(frames), goals, anchors, -0.1, 1.0)


def test_visual_loss_gradient(double_setup, frames):
    encoder, pool = double_setup
    index = pool.indices(PromptRole.appearance)[0]
    augmentor = PhotometricAugmentor.for_slot(pool.slots[index])
    batch = torch.from_numpy(frames)

    def loss():
        generator = torch.Generator().manual_seed(3)
        return visual_loss(encoder, pool, index, batch, augmentor, 1.0, generator)

    finite_difference_check(loss, pool.prompts[index])


def test_action_loss_gradient(double_setup, frames):
    encoder, pool = double_setup
    index = pool.indices(PromptRole.action)[0]
    torch.manual_seed(2)
    nets = OnlineTargetPair(d_out=12, hidden=16).double()
    actions = torch.tensor([0, 1, 2, 0, 1, 2])
    views = Views(
        query=torch.from_numpy(frames),
        key=torch.from_numpy(frames[::-1].copy()),
        actions_q=actions,
        actions_k=actions.clone(),
    )
    finite_difference_check(lambda: action_loss(encoder, pool, index, views, nets), pool.prompts[index])


def test_text_loss_gradient(double_setup, frames):
    encoder, pool = double_setup
    anchors = torch.as_tensor(text_anchor_table(0, 12))
    goals = torch.tensor([0, 3, 5, 7, 9, 11])
    batch = torch.from_numpy(frames)

    def loss():
        generator = torch.Generator().manual_seed(4)
        return text_loss(encoder, pool, pool.text_index, batch, goals, anchors, 0.1, 1.0, generator)

    finite_difference_check(loss, pool.prompts[pool.text_index])


def test_action_pair_with_different_actions_is_rejected(double_setup, frames):
    encoder, pool = double_setup
    nets = OnlineTargetPair(d_out=12, hidden=16).double()
    views = Views(
        query=torch.from_numpy(frames[:2]),
        key=torch.from_numpy(frames[2:4]),
        actions_q=torch.tensor([0, 1]),
        actions_k=torch.tensor([0, 2]),
    )
    with pytest.raises(SamplingError):
        action_loss(encoder, pool, pool.indices(PromptRole.action)[0], views, nets)


def test_augmentor_ownership(double_setup, frames):
    _, pool = double_setup
    index = pool.indices(PromptRole.appearance)[0]
    with pytest.raises(AugmentorConfigError):
        visual_loss(None, pool, index, torch.from_numpy(frames), PhotometricAugmentor(("brightness", "hue")), 1.0)
    with pytest.raises(AugmentorConfigError):
        PhotometricAugmentor(("gamma",))
    with pytest.raises(AugmentorConfigError):
        PhotometricAugmentor.for_slot(pool.slots[pool.text_index])


def test_augmentor_is_seeded(frames):
    augmentor = PhotometricAugmentor(("contrast",))
    batch = torch.from_numpy(frames)
    first = augmentor(batch, torch.Generator().manual_seed(0))
    second = augmentor(batch, torch.Generator().manual_seed(0))
    assert torch.equal(first, second)
    assert torch.equal(PhotometricAugmentor()(batch), batch)


def test_augmentation_alignment(tiny_encoder, tiny_pool, frames):
    batch = torch.from_numpy(frames)
    identity = augmentation_alignment(tiny_encoder, tiny_pool, 0, batch, PhotometricAugmentor())
    assert identity == pytest.approx(1.0, abs=1e-5)
    shifted = augmentation_alignment(
        tiny_encoder, tiny_pool, 0, batch, PhotometricAugmentor(("brightness",)), torch.Generator().manual_seed(1)
    )
    assert -1.0 - 1e-6 <= shifted <= 1.0 + 1e-6


def test_action_pairs_share_the_action(manifest, rng):
    table = manifest.frame_table()
    sampler = ActionPairSampler(table, manifest.factors, alignment_groups(manifest))
    pool = PromptPool.from_layout(n_prompts=10, length=1, prompt_dim=4, hidden=8, seed=0)
    for index in pool.indices(PromptRole.action):
        queries, keys = sampler.sample(pool.slots[index], 16, rng)
        np.testing.assert_array_equal(table.actions[queries], table.actions[keys])
        assert not np.any(queries == keys)


def test_train_prompts_keeps_the_encoder_frozen(manifest, tiny_encoder):
    before = tiny_encoder.checksum()
    report = train_prompts(
        manifest,
        tiny_encoder,
        PromptsConfig(n_prompts=4, length=2, prompt_dim=8),
        LossConfig(epochs=1, iterations_per_epoch=2, visual_batch=4, action_batch=2, text_batch=4),
        text_anchor_table(0, 12),
        seed=0,
    )
    assert tiny_encoder.checksum() == before
    assert report.iterations == 2
    assert report.call_counts == {"visual": 4, "action": 2, "text": 2}
    assert all(np.isfinite(v) for v in report.last_losses.values())


def test_disabled_branch_is_never_called(manifest, tiny_encoder):
    report = train_prompts(
        manifest,
        tiny_encoder,
        PromptsConfig(n_prompts=3, length=1, prompt_dim=8, use_text=False),
        LossConfig(epochs=1, iterations_per_epoch=1, visual_batch=4, action_batch=2),
        text_anchor_table(0, 12),
        seed=0,
    )
    assert report.call_counts["text"] == 0
    assert report.pool.text_index is None


def test_train_prompts_requires_frozen_encoder(manifest):
    encoder = PromptedViT(image_size=16, patch_size=8, hidden=16, layers=1, heads=2, d_out=12)
    with pytest.raises(ContractViolationError):
        train_prompts(manifest, encoder, PromptsConfig(), LossConfig(), text_anchor_table(0, 12), seed=0)
