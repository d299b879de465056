import numpy as np
import torch


def keyed_seed(*keys: int) -> int:
    """Independent 32-bit seed per key tuple, e.g. (seed, epoch, batch)."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


def keyed_generator(*keys: int) -> torch.Generator:
    return torch.Generator().manual_seed(keyed_seed(*keys))
