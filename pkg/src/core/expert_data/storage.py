import json
from pathlib import Path

import numpy as np

from src.core.envsim.scenes import load_scene, save_scene
from src.core.envsim.sim_typings import DomainFactor, GridScene
from src.core.errors import PrerequisiteError
from src.core.expert_data.data_typings import AlignmentPair, DatasetManifest, Trajectory

MANIFEST_FILENAME = "trajectories.jsonl"
PAIRS_FILENAME = "alignment.json"
FACTORS_FILENAME = "factors.json"


def save_dataset(manifest: DatasetManifest, root: Path | str, config_digest: str = "") -> Path:
    """
    One directory per factor holding a raw frame blob per trajectory,
    a JSON-lines manifest, the alignment pairs, factors and scenes.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    for index, scene in enumerate(manifest.scenes):
        save_scene(scene, root / "scenes" / f"scene_{index:03d}.json")

    with (root / FACTORS_FILENAME).open("w", encoding="utf-8") as file:
        json.dump(
            {
                "config_digest": config_digest,
                "kappa": manifest.kappa,
                "n_scenes": len(manifest.scenes),
                "factors": [factor.to_dict() for factor in manifest.factors],
            },
            file,
            indent=2,
        )

    with (root / MANIFEST_FILENAME).open("w", encoding="utf-8") as manifest_file:
        for factor_id in sorted(manifest.trajectories):
            factor_dir = root / f"factor_{factor_id:02d}"
            factor_dir.mkdir(parents=True, exist_ok=True)
            for index, trajectory in enumerate(manifest.trajectories[factor_id]):
                blob = factor_dir / f"traj_{index:05d}.bin"
                data = np.ascontiguousarray(trajectory.frames, dtype=np.uint8)
                data.tofile(blob)
                record = trajectory.record()
                record.update(
                    {
                        "index": index,
                        "file": str(blob.relative_to(root)),
                        "offset": 0,
                        "nbytes": int(data.nbytes),
                        "frame_shape": list(data.shape[1:]),
                        "config_digest": config_digest,
                    }
                )
                manifest_file.write(json.dumps(record) + "\n")

    with (root / PAIRS_FILENAME).open("w", encoding="utf-8") as file:
        json.dump(
            {
                "config_digest": config_digest,
                "kappa": manifest.kappa,
                "pairs": [pair.to_dict() for pair in manifest.pairs],
            },
            file,
            indent=2,
        )
    return root


def load_dataset(root: Path | str) -> DatasetManifest:
    root = Path(root)
    if not (root / MANIFEST_FILENAME).exists():
        raise PrerequisiteError(f"no dataset manifest under {root}")

    with (root / FACTORS_FILENAME).open("r", encoding="utf-8") as file:
        header = json.load(file)
    factors = [DomainFactor.from_dict(item) for item in header["factors"]]
    scenes = [
        load_scene(root / "scenes" / f"scene_{index:03d}.json")
        for index in range(header["n_scenes"])
    ]

    trajectories: dict[int, list[Trajectory]] = {i: [] for i in range(len(factors))}
    with (root / MANIFEST_FILENAME).open("r", encoding="utf-8") as file:
        for line in file:
            record = json.loads(line)
            shape = (record["length"], *record["frame_shape"])
            frames = np.fromfile(
                root / record["file"], dtype=np.uint8, count=record["nbytes"], offset=record["offset"]
            ).reshape(shape)
            trajectories[record["factor"]].append(Trajectory.from_record(record, frames))

    with (root / PAIRS_FILENAME).open("r", encoding="utf-8") as file:
        pairs_payload = json.load(file)
    pairs = [
        AlignmentPair(
            base_index=item["base_index"],
            factor_id=item["factor"],
            other_index=item["other_index"],
            f1=item["f1"],
        )
        for item in pairs_payload["pairs"]
    ]
    return DatasetManifest(
        factors=factors,
        scenes=scenes,
        trajectories={k: v for k, v in trajectories.items() if v},
        pairs=pairs,
        kappa=float(header["kappa"]),
    )


def dataset_digest(root: Path | str) -> str:
    with (Path(root) / FACTORS_FILENAME).open("r", encoding="utf-8") as file:
        return json.load(file).get("config_digest", "")


def load_scenes(root: Path | str) -> list[GridScene]:
    """Scenes of a stored dataset without reading any frame blob."""
    root = Path(root)
    if not (root / FACTORS_FILENAME).exists():
        raise PrerequisiteError(f"no dataset under {root}")
    with (root / FACTORS_FILENAME).open("r", encoding="utf-8") as file:
        n_scenes = json.load(file)["n_scenes"]
    return [load_scene(root / "scenes" / f"scene_{index:03d}.json") for index in range(n_scenes)]
