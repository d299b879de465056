import numpy as np
import pytest

from src.core.config import RunConfig
from src.core.consts import CATEGORY_COLORS
from src.core.envsim import DomainFactor, FovGroup, GridScene, SceneObject, generate_scene


@pytest.fixture(scope="session")
def scene():
    return generate_scene(seed=3, size=10, n_wall_segments=1)


@pytest.fixture(scope="session")
def scenes():
    return [generate_scene(seed=s, size=10, n_wall_segments=1) for s in (3, 4)]


@pytest.fixture
def corridor():
    """Walled 3x16 strip: free cells (1, 1)..(1, 13), category 0 at (1, 14)."""
    walls = np.ones((3, 16), dtype=bool)
    walls[1, 1:15] = False
    return GridScene(16, 3, walls, [SceneObject(0, (1, 14), CATEGORY_COLORS[0])])


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def factors():
    return [
        DomainFactor(),
        DomainFactor(
            fov_group=FovGroup.wide,
            rotation_step=45,
            look_step=15,
            translation_step=0.5,
            brightness=0.8,
            contrast=1.2,
            saturation=0.5,
            hue_shift=0.05,
        ),
    ]


@pytest.fixture
def tiny_config(tmp_path):
    """Smallest config every phase accepts; runs in seconds on CPU."""
    return RunConfig.model_validate(
        {
            "out_dir": str(tmp_path / "run"),
            "env": {"n_scenes": 1, "scene_size": 10, "n_wall_segments": 1, "image_size": 16, "max_steps": 200},
            "split": {"n_source": 1, "n_seen": 1, "n_unseen": 1},
            "collect": {"n_per_factor": 2},
            "encoder": {"patch_size": 8, "hidden": 16, "layers": 1, "heads": 2, "d_out": 12,
                        "pretrain_epochs": 1, "pretrain_batch_size": 4},
            "prompts": {"n_prompts": 3, "length": 1, "prompt_dim": 8},
            "loss": {"epochs": 1, "iterations_per_epoch": 1, "visual_batch": 4, "action_batch": 2, "text_batch": 4},
            "orchestrator": {"hidden": 8},
            "ppo": {"n_envs": 1, "rollout_length": 8, "total_steps": 16, "epochs": 1, "minibatches": 1,
                    "hidden": 8, "action_embedding": 4, "curve_window": 8},
            "evaluation": {"episodes_per_domain": 1, "n_eval_seeds": 1},
            "probe": {"n_samples": 2, "max_iter": 50},
            "export": {"n_samples": 2, "alpha_trace_steps": 3},
        }
    )


@pytest.fixture(scope="session")
def manifest(scenes):
    from src.core.envsim import DomainFactor as Factor, FovGroup as Fov
    from src.core.expert_data import collect_and_align

    factors = [Factor(), Factor(fov_group=Fov.narrow, brightness=1.3, hue_shift=-0.05)]
    return collect_and_align(
        scenes, factors, n_per_factor=3, kappa=0.5, seed=0, image_size=16, max_steps=200, show_progress=False
    )


@pytest.fixture
def tiny_encoder():
    import torch

    from src.core.encoder import PromptedViT

    torch.manual_seed(0)
    return PromptedViT(image_size=16, patch_size=8, hidden=16, layers=1, heads=2, d_out=12).freeze()


@pytest.fixture
def tiny_pool():
    from src.core.encoder import PromptPool

    return PromptPool.from_layout(n_prompts=4, length=2, prompt_dim=8, hidden=16, seed=0)


@pytest.fixture
def frames(rng):
    return rng.integers(0, 256, size=(6, 3, 16, 16), dtype=np.uint8)
