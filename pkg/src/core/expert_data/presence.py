import numpy as np

from src.core.consts import IMAGE_SIZE, N_CATEGORIES
from src.core.envsim.render import cast_rays, column_angles
from src.core.envsim.sim_typings import AgentState, DomainFactor, GridScene


def presence_vector(
    scene: GridScene,
    agent: AgentState,
    factor: DomainFactor,
    image_size: int = IMAGE_SIZE,
) -> np.ndarray:
    """Bit i is set iff some column ray of the render first hits an instance of category i."""
    presence = np.zeros(N_CATEGORIES, dtype=np.uint8)
    if not scene.objects:
        return presence
    hits = cast_rays(scene, agent, column_angles(agent.heading, factor.fov, image_size))
    for index in np.unique(hits.object_index[hits.object_index >= 0]):
        presence[scene.objects[int(index)].category] = 1
    return presence


def f1_score(m1: np.ndarray, m2: np.ndarray) -> float:
    """F1 between presence vectors; 0 when either vector is all-zero."""
    m1 = np.asarray(m1, dtype=bool)
    m2 = np.asarray(m2, dtype=bool)
    if m1.shape != m2.shape:
        raise ValueError(f"presence vectors differ in shape: {m1.shape} vs {m2.shape}")
    overlap = int(np.sum(m1 & m2))
    if not m1.any() or not m2.any() or overlap == 0:
        return 0.0
    # 2PR / (P + R) with P = o / |m2|, R = o / |m1| reduces to 2o / (|m1| + |m2|).
    return 2.0 * overlap / (int(m1.sum()) + int(m2.sum()))
