import json
import logging

from src.core.checkpoint import load_module, load_modules, read_metadata
from src.core.config import EncoderConfig
from src.core.encoder.features import PromptFeatureExtractor
from src.core.encoder.pretrain import build_encoder
from src.core.encoder.prompt_pool import PromptPool, slots_from_names
from src.core.encoder.vit import PromptedViT
from src.core.envsim.sim_typings import GridScene
from src.core.errors import DigestMismatchError, PrerequisiteError
from src.core.evalkit.splits import DomainSplit
from src.core.expert_data.data_typings import DatasetManifest
from src.core.expert_data.storage import load_dataset, load_scenes
from src.core.orchestrator.attention import FusionMode, PromptOrchestrator
from src.core.phases.phase_typings import ArtifactStore
from src.core.policy.agent import NavigationPolicy
from src.core.policy.recurrent import RecurrentActorCritic


def load_manifest(store: ArtifactStore) -> DatasetManifest:
    return load_dataset(store.path("dataset").parent)


def load_scene_pool(store: ArtifactStore) -> list[GridScene]:
    return load_scenes(store.path("dataset").parent)


def load_split(store: ArtifactStore) -> DomainSplit:
    path = store.path("split")
    if not path.exists():
        raise PrerequisiteError(f"split file {path} does not exist; run collect first")
    with path.open("r", encoding="utf-8") as file:
        return DomainSplit.from_dict(json.load(file))


def load_encoder(store: ArtifactStore) -> PromptedViT:
    """Rebuild the frozen encoder from its archive and verify its recorded checksum."""
    path = store.path("encoder")
    metadata = read_metadata(path)
    encoder = build_encoder(EncoderConfig(**metadata["encoder"]), int(metadata["image_size"]))
    load_module(path, encoder)
    encoder.freeze()
    if encoder.checksum() != metadata.get("encoder_digest"):
        raise DigestMismatchError(f"encoder archive {path} does not match its recorded digest")
    return encoder


def load_pool(store: ArtifactStore, encoder: PromptedViT) -> PromptPool:
    """Prompt pool trained on exactly this encoder."""
    path = store.path("prompts")
    metadata = read_metadata(path)
    if metadata.get("encoder_digest") != encoder.checksum():
        raise DigestMismatchError(
            f"prompts {path} were trained on encoder {str(metadata.get('encoder_digest'))[:12]},"
            f" the current encoder is {encoder.checksum()[:12]}"
        )
    pool = PromptPool(
        slots_from_names(metadata["layout"]),
        int(metadata["length"]),
        int(metadata["prompt_dim"]),
        int(metadata["hidden"]),
    )
    load_module(path, pool)
    pool.requires_grad_(False)
    return pool


def load_policy(
    store: ArtifactStore, extractor: PromptFeatureExtractor
) -> tuple[NavigationPolicy, dict]:
    """Recurrent core and orchestrator, checked against the extractor's encoder and prompts."""
    path = store.path("policy")
    metadata = read_metadata(path)
    if metadata.get("encoder_digest") != extractor.encoder.checksum():
        raise DigestMismatchError(f"policy {path} was trained on a different encoder")
    prompts_digest = extractor.pool.checksum() if extractor.pool is not None else None
    if metadata.get("prompts_digest") != prompts_digest:
        raise DigestMismatchError(f"policy {path} was trained on a different prompt pool")

    orchestrator = PromptOrchestrator(
        extractor.d_out, int(metadata["orchestrator_hidden"]), FusionMode(metadata["fusion"])
    )
    core = RecurrentActorCritic(extractor.d_out, int(metadata["hidden"]), int(metadata["action_embedding"]))
    load_modules(path, {"core": core, "orchestrator": orchestrator})
    core.eval()
    orchestrator.eval()
    logging.debug(f"Loaded policy {path} with fusion {metadata['fusion']}")
    return NavigationPolicy(extractor, orchestrator, core), metadata
