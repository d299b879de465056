import hashlib
import json
import struct
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import torch
import torch.nn as nn

from src.core.errors import PrerequisiteError

HEADER_LENGTH_FORMAT = "<Q"
METADATA_KEY = "__metadata__"


def save_tensors(
    path: Path | str,
    tensors: Mapping[str, torch.Tensor | np.ndarray],
    metadata: dict[str, Any] | None = None,
) -> Path:
    """
    Named-tensor archive: 8-byte little-endian header length, a UTF-8 JSON header
    name -> {shape, dtype, offset, nbytes} plus __metadata__, then little-endian f32 data.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header: dict[str, Any] = {METADATA_KEY: metadata or {}}
    blobs, offset = [], 0
    for name in sorted(tensors):
        value = tensors[name]
        if isinstance(value, torch.Tensor):
            value = value.detach().cpu().numpy()
        data = np.ascontiguousarray(value, dtype="<f4")
        header[name] = {
            "shape": list(data.shape),
            "dtype": "f32",
            "offset": offset,
            "nbytes": data.nbytes,
        }
        blobs.append(data.tobytes())
        offset += data.nbytes

    encoded = json.dumps(header, sort_keys=True).encode("utf-8")
    with path.open("wb") as file:
        file.write(struct.pack(HEADER_LENGTH_FORMAT, len(encoded)))
        file.write(encoded)
        for blob in blobs:
            file.write(blob)
    return path


def load_tensors(path: Path | str) -> tuple[dict[str, np.ndarray], dict[str, Any]]:
    path = Path(path)
    if not path.exists():
        raise PrerequisiteError(f"checkpoint {path} does not exist")
    raw = path.read_bytes()
    (length,) = struct.unpack_from(HEADER_LENGTH_FORMAT, raw, 0)
    start = struct.calcsize(HEADER_LENGTH_FORMAT)
    header = json.loads(raw[start : start + length].decode("utf-8"))
    data_start = start + length

    metadata = header.pop(METADATA_KEY, {})
    tensors = {}
    for name, entry in header.items():
        begin = data_start + entry["offset"]
        array = np.frombuffer(raw, dtype="<f4", count=entry["nbytes"] // 4, offset=begin)
        tensors[name] = array.reshape(entry["shape"]).astype(np.float32)
    return tensors, metadata


def read_metadata(path: Path | str) -> dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise PrerequisiteError(f"checkpoint {path} does not exist")
    with path.open("rb") as file:
        (length,) = struct.unpack(HEADER_LENGTH_FORMAT, file.read(struct.calcsize(HEADER_LENGTH_FORMAT)))
        return json.loads(file.read(length).decode("utf-8")).get(METADATA_KEY, {})


def save_module(path: Path | str, module: nn.Module, metadata: dict[str, Any] | None = None) -> Path:
    return save_tensors(path, module.state_dict(), metadata)


def load_module(path: Path | str, module: nn.Module) -> dict[str, Any]:
    """Load an archive into module in place, casting to each entry's current dtype."""
    tensors, metadata = load_tensors(path)
    state = module.state_dict()
    missing = sorted(set(state) - set(tensors))
    if missing:
        raise PrerequisiteError(f"checkpoint {path} lacks tensors {missing}")
    module.load_state_dict(
        {name: torch.from_numpy(tensors[name]).to(state[name].dtype) for name in state}
    )
    return metadata


def save_modules(
    path: Path | str, modules: Mapping[str, nn.Module], metadata: dict[str, Any] | None = None
) -> Path:
    """Several modules in one archive, tensor names prefixed by '<key>.'."""
    tensors = {
        f"{key}.{name}": tensor
        for key, module in modules.items()
        for name, tensor in module.state_dict().items()
    }
    return save_tensors(path, tensors, metadata)


def load_modules(path: Path | str, modules: Mapping[str, nn.Module]) -> dict[str, Any]:
    tensors, metadata = load_tensors(path)
    for key, module in modules.items():
        state = module.state_dict()
        missing = sorted(name for name in state if f"{key}.{name}" not in tensors)
        if missing:
            raise PrerequisiteError(f"checkpoint {path} lacks {key} tensors {missing}")
        module.load_state_dict(
            {name: torch.from_numpy(tensors[f"{key}.{name}"]).to(state[name].dtype) for name in state}
        )
    return metadata


def file_sha256(path: Path | str) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as file:
        for chunk in iter(lambda: file.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def module_checksum(module: nn.Module) -> str:
    """SHA-256 over every state tensor's name and raw bytes."""
    digest = hashlib.sha256()
    for name, tensor in sorted(module.state_dict().items()):
        digest.update(name.encode("utf-8"))
        digest.update(tensor.detach().cpu().contiguous().numpy().tobytes())
    return digest.hexdigest()
