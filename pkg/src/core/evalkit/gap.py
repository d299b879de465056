import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from src.core.config import ProbeConfig
from src.core.encoder.features import PromptFeatureExtractor
from src.core.envsim.render import render
from src.core.errors import ContractViolationError
from src.core.expert_data.collection import replay_states
from src.core.expert_data.data_typings import DatasetManifest


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum x = 1} by sorting."""
    v = np.asarray(v, dtype=np.float64)
    u = np.sort(v)[::-1]
    cumulative = np.cumsum(u) - 1.0
    ranks = np.arange(1, len(v) + 1)
    rho = np.nonzero(u - cumulative / ranks > 0)[0][-1]
    theta = cumulative[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


@dataclass
class GapProbeResult:
    """
    Minimiser of ||sum_k alpha_k z_k - (z_star - z_v)|| over the simplex.
    Parameters:
    - alpha - simplex weights
    - residual - distance at alpha
    - iterations - projected-gradient steps taken
    - converged - iterate movement dropped below the tolerance
    - step - gradient step size used
    """

    alpha: np.ndarray
    residual: float
    iterations: int
    converged: bool
    step: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "alpha": self.alpha.tolist(),
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "step": self.step,
        }


def approximation_gap(
    z_v: np.ndarray,
    z_k: np.ndarray,
    z_star: np.ndarray,
    max_iter: int = 1000,
    tol: float = 1e-10,
    step: float | None = None,
    lipschitz_step: bool = False,
) -> GapProbeResult:
    """
    Projected gradient descent on 0.5 ||Z^T alpha - (z_star - z_v)||^2 from the uniform
    point. Non-convergence is reported through the flag, never raised.
    Step: `step` when given, else 1 / L with `lipschitz_step`, else 0.1 / K'.
    """
    z_v = np.asarray(z_v, dtype=np.float64)
    z_k = np.atleast_2d(np.asarray(z_k, dtype=np.float64))
    z_star = np.asarray(z_star, dtype=np.float64)
    n_prompts = z_k.shape[0]
    if n_prompts < 1:
        raise ContractViolationError("the gap probe needs at least one prompt embedding")
    if z_v.shape != z_star.shape or z_k.shape[1] != z_v.shape[0]:
        raise ContractViolationError(
            f"dimension mismatch: z_v {z_v.shape}, z_k {z_k.shape}, z_star {z_star.shape}"
        )

    target = z_star - z_v
    gram = z_k @ z_k.T
    linear = z_k @ target
    if step is None:
        step = 0.1 / n_prompts
        if lipschitz_step:
            lipschitz = float(np.linalg.eigvalsh(gram)[-1])
            step = 1.0 / lipschitz if lipschitz > 0 else step

    alpha = np.full(n_prompts, 1.0 / n_prompts)
    # a single prompt has the trivial simplex {1}
    converged, iterations = n_prompts == 1, 0
    while not converged and iterations < max_iter:
        updated = project_simplex(alpha - step * (gram @ alpha - linear))
        iterations += 1
        converged = bool(np.linalg.norm(updated - alpha) < tol)
        alpha = updated
    residual = float(np.linalg.norm(z_k.T @ alpha - target))
    return GapProbeResult(
        alpha=alpha, residual=residual, iterations=iterations, converged=converged, step=step
    )


def canonical_views(
    manifest: DatasetManifest, n_samples: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """
    Frames drawn from the non-base factors together with the same poses re-rendered under
    the base factor, which stands in for the optimal domain-invariant view.
    """
    everything = manifest.all_trajectories()
    trajectories = [t for t in everything if t.factor_id != 0] or everything
    if not trajectories:
        raise ContractViolationError("cannot probe the gap on an empty dataset")
    rng = np.random.default_rng([seed, 5])
    base = manifest.factors[0]
    lengths = np.array([t.length for t in trajectories])
    picks = rng.choice(int(lengths.sum()), size=n_samples, replace=n_samples > lengths.sum())
    bounds = np.cumsum(lengths)

    frames, canonical, states = [], [], {}
    for pick in picks:
        index = int(np.searchsorted(bounds, pick, side="right"))
        t = int(pick - (bounds[index] - lengths[index]))
        trajectory = trajectories[index]
        if index not in states:
            states[index] = replay_states(
                trajectory, manifest.scenes, manifest.factors[trajectory.factor_id]
            )
        image_size = trajectory.frames.shape[-1]
        frames.append(trajectory.frames[t])
        scene = manifest.scenes[trajectory.scene_index]
        canonical.append(render(scene, states[index][t], base, image_size).rgb)
    return np.stack(frames), np.stack(canonical)


def probe_gap(
    extractor: PromptFeatureExtractor,
    manifest: DatasetManifest,
    config: ProbeConfig,
    seed: int,
) -> tuple[list[list[GapProbeResult]], dict[str, Any]]:
    """
    Gap per sample for every prompt prefix 1..K'. Returns the per-sample results (index k-1
    holds the first k prompts) and a summary keyed by prefix size.
    """
    if extractor.n_domain_prompts < 1:
        raise ContractViolationError("the gap probe needs a prompt pool")
    frames, canonical = canonical_views(manifest, config.n_samples, seed)
    encoded = extractor(frames)
    z_star = extractor(canonical).z_v.double().numpy()
    z_v = encoded.z_v.double().numpy()
    z_k = encoded.z_k.double().numpy()

    results = []
    for i in range(len(frames)):
        results.append(
            [
                approximation_gap(
                    z_v[i],
                    z_k[i, :k],
                    z_star[i],
                    config.max_iter,
                    config.tol,
                    config.step,
                    config.lipschitz_step,
                )
                for k in range(1, z_k.shape[1] + 1)
            ]
        )
    summary = {}
    for k in range(1, z_k.shape[1] + 1):
        residuals = [sample[k - 1].residual for sample in results]
        summary[str(k)] = {
            "mean_residual": float(np.mean(residuals)),
            "max_residual": float(np.max(residuals)),
            "converged": float(np.mean([sample[k - 1].converged for sample in results])),
        }
    logging.info(f"Gap probe over {len(frames)} frames: {summary[str(z_k.shape[1])]}")
    return results, summary
