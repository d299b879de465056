import numpy as np
import pytest
import torch
import torch.nn.functional as F

from src.core.errors import ContractViolationError
from src.core.evalkit.gap import approximation_gap
from src.core.logs import read_csv
from src.core.orchestrator import (
    FusionMode,
    PromptOrchestrator,
    attention_weights,
    dual_scores,
    fuse,
    stable_softmax,
    write_alpha_trace,
)


def random_embeddings(n, n_prompts, d=12, seed=0):
    generator = torch.Generator().manual_seed(seed)
    z_v = F.normalize(torch.randn(n, d, generator=generator, dtype=torch.float64), dim=-1)
    z_t = F.normalize(torch.randn(n, d, generator=generator, dtype=torch.float64), dim=-1)
    z_k = F.normalize(torch.randn(n, n_prompts, d, generator=generator, dtype=torch.float64), dim=-1)
    return z_v, z_t, z_k


@pytest.mark.parametrize("mode", [FusionMode.dual, FusionMode.average, FusionMode.attention_only, FusionMode.cosine_only])
def test_weights_lie_on_the_simplex(mode):
    torch.manual_seed(0)
    orchestrator = PromptOrchestrator(d_out=12, hidden=16, mode=mode).double()
    z_v, z_t, z_k = random_embeddings(64, 5)
    _, alpha = orchestrator(z_v, z_t, z_k)
    assert alpha.shape == (64, 5)
    assert torch.all(alpha > 0)
    torch.testing.assert_close(alpha.sum(dim=-1), torch.ones(64, dtype=torch.float64), atol=1e-6, rtol=0)


def test_uniform_product_gives_uniform_weights():
    s = torch.full((2, 4), 0.3)
    torch.testing.assert_close(attention_weights(s, s), torch.full((2, 4), 0.25))


def test_two_prompt_example():
    alpha = attention_weights(torch.tensor([[1.0, 0.5]]), torch.tensor([[1.0, 1.0]]))
    torch.testing.assert_close(alpha, torch.tensor([[0.6225, 0.3775]]), atol=1e-4, rtol=0)


def test_softmax_is_stable_for_large_scores():
    alpha = stable_softmax(torch.tensor([[1000.0, 1000.0, -1000.0]]))
    assert torch.isfinite(alpha).all()
    torch.testing.assert_close(alpha, torch.tensor([[0.5, 0.5, 0.0]]))


def test_fused_embedding_lies_in_the_prompt_hull():
    torch.manual_seed(1)
    orchestrator = PromptOrchestrator(d_out=12, hidden=16).double()
    z_v, z_t, z_k = random_embeddings(1000, 3, seed=1)
    with torch.no_grad():
        z_f, _ = orchestrator(z_v, z_t, z_k)
    for i in range(len(z_f)):
        result = approximation_gap(
            (z_v[i] + z_t[i]).numpy(), z_k[i].numpy(), z_f[i].numpy(), max_iter=5000, tol=1e-12
        )
        assert result.residual <= 1e-6


def test_fuse_without_text():
    z_v, _, z_k = random_embeddings(3, 2)
    s = torch.zeros(3, 2, dtype=torch.float64)
    z_f, alpha = fuse(z_v, None, z_k, s, s, FusionMode.average)
    torch.testing.assert_close(z_f, z_v + z_k.mean(dim=1))


def test_vanilla_mode_passes_the_vanilla_embedding():
    orchestrator = PromptOrchestrator(d_out=12, hidden=16, mode=FusionMode.vanilla).double()
    z_v, z_t, z_k = random_embeddings(4, 3)
    z_f, alpha = orchestrator(z_v, z_t, z_k)
    assert torch.equal(z_f, z_v)
    assert alpha.shape == (4, 0)


def test_shape_mismatch_raises():
    z_v, _, z_k = random_embeddings(4, 3)
    with pytest.raises(ContractViolationError):
        dual_scores(z_v[:, :5], z_k, torch.nn.Identity())
    with pytest.raises(ContractViolationError):
        fuse(z_v, None, z_k[:, :0], torch.zeros(4, 0), torch.zeros(4, 0))


def test_attention_gradient_reaches_the_projection():
    orchestrator = PromptOrchestrator(d_out=12, hidden=16).double()
    z_v, z_t, z_k = random_embeddings(8, 3)
    z_f, _ = orchestrator(z_v, z_t, z_k)
    z_f.pow(2).sum().backward()
    assert all(p.grad is not None for p in orchestrator.parameters())


def test_alpha_trace_csv(tmp_path):
    path = write_alpha_trace(tmp_path / "alpha.csv", np.array([[0.25, 0.75], [0.5, 0.5]]), ["hue", "rotation"])
    rows = read_csv(path)
    assert list(rows[0]) == ["step", "alpha_hue", "alpha_rotation"]
    assert float(rows[1]["alpha_rotation"]) == 0.5
