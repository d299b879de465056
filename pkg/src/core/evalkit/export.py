from dataclasses import dataclass
from pathlib import Path
from typing_extensions import Self

import numpy as np
import torch

from src.core.encoder.prompt_pool import PromptPool
from src.core.encoder.vit import PromptedViT, frames_to_tensor
from src.core.errors import ContractViolationError
from src.core.expert_data.data_typings import FrameTable
from src.core.logs import read_csv, write_csv


@dataclass
class EmbeddingExport:
    """One row per (sample, prompt): the prompted embedding of the sampled frame."""

    factor_ids: np.ndarray
    prompt_ids: np.ndarray
    prompt_names: list[str]
    vectors: np.ndarray

    def __len__(self) -> int:
        return len(self.vectors)

    def write(self, path: Path | str, config_digest: str | None = None) -> Path:
        header = ["factor_id", "prompt_id", "prompt_name", *[f"z_{i}" for i in range(self.vectors.shape[1])]]
        rows = (
            [int(f), int(p), name, *map(float, vector)]
            for f, p, name, vector in zip(self.factor_ids, self.prompt_ids, self.prompt_names, self.vectors)
        )
        return write_csv(path, header, rows, config_digest)

    @classmethod
    def read(cls, path: Path | str) -> Self:
        rows = read_csv(path)
        if not rows:
            raise ContractViolationError(f"embedding export {path} is empty")
        coords = sorted((k for k in rows[0] if k.startswith("z_")), key=lambda k: int(k[2:]))
        return cls(
            factor_ids=np.array([int(r["factor_id"]) for r in rows]),
            prompt_ids=np.array([int(r["prompt_id"]) for r in rows]),
            prompt_names=[r["prompt_name"] for r in rows],
            vectors=np.array([[float(r[k]) for k in coords] for r in rows]),
        )


@torch.no_grad()
def export_embeddings(
    encoder: PromptedViT,
    pool: PromptPool,
    table: FrameTable,
    n_samples: int,
    seed: int,
) -> EmbeddingExport:
    """Embed n_samples frames (drawn without replacement when possible) under every prompt."""
    if len(table) == 0:
        raise ContractViolationError("cannot export embeddings of an empty dataset")
    rng = np.random.default_rng([seed, 6])
    picks = np.sort(rng.choice(len(table), size=n_samples, replace=n_samples > len(table)))
    images = frames_to_tensor(table.frames[picks])

    factor_ids, prompt_ids, names, vectors = [], [], [], []
    for k, slot in enumerate(pool.slots):
        z = encoder(images, pool.tokens(k)).numpy().astype(np.float64)
        factor_ids.append(table.factor_ids[picks])
        prompt_ids.append(np.full(len(picks), k))
        names.extend([slot.name] * len(picks))
        vectors.append(z)
    return EmbeddingExport(
        factor_ids=np.concatenate(factor_ids),
        prompt_ids=np.concatenate(prompt_ids),
        prompt_names=names,
        vectors=np.concatenate(vectors),
    )


def prompt_separation(export: EmbeddingExport) -> dict[str, float]:
    """Mean pairwise cosine within the same prompt versus across different prompts."""
    vectors = export.vectors / np.linalg.norm(export.vectors, axis=1, keepdims=True)
    cosine = vectors @ vectors.T
    same = export.prompt_ids[:, None] == export.prompt_ids[None, :]
    off_diagonal = ~np.eye(len(vectors), dtype=bool)
    within, across = same & off_diagonal, ~same
    if not within.any() or not across.any():
        raise ContractViolationError("separation needs at least two samples and two prompts")
    result = {"within": float(cosine[within].mean()), "across": float(cosine[across].mean())}
    result["margin"] = result["within"] - result["across"]
    return result
