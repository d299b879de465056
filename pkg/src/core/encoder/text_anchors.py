from functools import lru_cache

import numpy as np

from src.core.consts import N_CATEGORIES
from src.core.errors import ContractViolationError


@lru_cache(maxsize=8)
def text_anchor_table(seed: int = 0, d_out: int = 32) -> np.ndarray:
    """
    Fixed orthonormal semantic anchors, one row per category.
    Orthonormalises seeded Gaussian vectors (QR) with the sign convention diag(R) > 0.
    """
    if d_out < N_CATEGORIES:
        raise ContractViolationError(
            f"need d_out >= {N_CATEGORIES} for orthonormal anchors, got {d_out}"
        )
    rng = np.random.default_rng([seed, d_out])
    q, r = np.linalg.qr(rng.standard_normal((d_out, N_CATEGORIES)))
    q = q * np.sign(np.diag(r))
    anchors = np.ascontiguousarray(q.T)
    anchors.setflags(write=False)
    return anchors


def text_anchor(category: int, seed: int = 0, d_out: int = 32) -> np.ndarray:
    if not 0 <= category < N_CATEGORIES:
        raise ContractViolationError(f"category must lie in [0, {N_CATEGORIES}), got {category}")
    return text_anchor_table(seed, d_out)[category]
