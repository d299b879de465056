import numpy as np
import pytest
import torch

from src.core.consts import N_CATEGORIES
from src.core.encoder import (
    PromptFeatureExtractor,
    PromptedViT,
    PromptRole,
    encode,
    prompt_layout,
    text_anchor,
    text_anchor_table,
)
from src.core.encoder.prompt_pool import slots_from_names
from src.core.errors import ContractViolationError, EncoderShapeError


def test_embeddings_are_unit_norm(tiny_encoder, tiny_pool, frames):
    for prompt in (None, tiny_pool.tokens(0)):
        z = encode(tiny_encoder, frames, prompt)
        assert z.shape == (len(frames), 12)
        torch.testing.assert_close(z.norm(dim=-1), torch.ones(len(frames)))


def test_encoding_is_deterministic(tiny_encoder, tiny_pool, frames):
    first = encode(tiny_encoder, frames, tiny_pool.tokens(1))
    second = encode(tiny_encoder, frames, tiny_pool.tokens(1))
    assert torch.equal(first, second)


def test_prompt_changes_embedding(tiny_encoder, tiny_pool, frames):
    assert not torch.allclose(encode(tiny_encoder, frames), encode(tiny_encoder, frames, tiny_pool.tokens(0)))


def test_shape_errors(tiny_encoder, tiny_pool):
    with pytest.raises(EncoderShapeError):
        encode(tiny_encoder, np.zeros((1, 3, 24, 24), dtype=np.uint8))
    with pytest.raises(EncoderShapeError):
        encode(tiny_encoder, np.zeros((1, 3, 16, 16), dtype=np.uint8), torch.zeros(2, 5))
    with pytest.raises(EncoderShapeError):
        PromptedViT(image_size=20, patch_size=8)


def test_frozen_encoder_stays_in_eval_and_without_grad(tiny_encoder):
    tiny_encoder.train()
    assert not tiny_encoder.training
    assert all(not p.requires_grad for p in tiny_encoder.parameters())


def test_prompt_gradient_reaches_only_the_prompt(tiny_encoder, tiny_pool, frames):
    z = encode(tiny_encoder, frames, tiny_pool.tokens(2))
    z.sum().backward()
    assert tiny_pool.prompts[2].grad is not None
    assert tiny_pool.prompts[0].grad is None
    assert all(p.grad is None for p in tiny_encoder.parameters())


def test_text_anchors_are_orthonormal():
    table = text_anchor_table(seed=0, d_out=16)
    np.testing.assert_allclose(table @ table.T, np.eye(N_CATEGORIES), atol=1e-10)
    np.testing.assert_array_equal(text_anchor(3, seed=0, d_out=16), table[3])
    np.testing.assert_array_equal(text_anchor_table(seed=0, d_out=16), table)
    with pytest.raises(ContractViolationError):
        text_anchor_table(seed=0, d_out=8)
    with pytest.raises(ContractViolationError):
        text_anchor(N_CATEGORIES)


@pytest.mark.parametrize("n_prompts", range(2, 13))
def test_prompt_layout(n_prompts):
    slots = prompt_layout(n_prompts)
    names = [slot.name for slot in slots]
    assert len(slots) == n_prompts
    assert len(set(names)) == n_prompts
    assert slots[-1].role == PromptRole.text
    assert slots_from_names(names) == slots
    roles = [slot.role for slot in slots]
    assert roles == sorted(roles, key=[PromptRole.appearance, PromptRole.action, PromptRole.text].index)


def test_prompt_layout_bounds():
    for n_prompts in (1, 13):
        with pytest.raises(ContractViolationError):
            prompt_layout(n_prompts)
    assert all(slot.role != PromptRole.text for slot in prompt_layout(5, with_text=False))


def test_pool_indices(tiny_pool):
    assert tiny_pool.text_index == len(tiny_pool) - 1
    assert tiny_pool.domain_indices == list(range(len(tiny_pool) - 1))
    assert tiny_pool.tokens(0).shape == (2, 16)
    assert tiny_pool.index_of(tiny_pool.names[1]) == 1


def test_pool_projection_is_not_a_parameter(tiny_pool):
    names = {name for name, _ in tiny_pool.named_parameters()}
    assert "projection" not in names
    assert "projection" in dict(tiny_pool.named_buffers())


def test_feature_extractor(tiny_encoder, tiny_pool, frames):
    batch = PromptFeatureExtractor(tiny_encoder, tiny_pool)(frames)
    assert batch.z_v.shape == (6, 12)
    assert batch.z_k.shape == (6, 3, 12)
    assert batch.z_t.shape == (6, 12)
    torch.testing.assert_close(batch.z_k[:, 1], encode(tiny_encoder, frames, tiny_pool.tokens(1)))

    vanilla = PromptFeatureExtractor(tiny_encoder)(frames)
    assert vanilla.z_t is None and vanilla.z_k.shape == (6, 0, 12)
