from dataclasses import dataclass
from typing import Any, Literal
from typing_extensions import Self

import numpy as np

from src.core.config import SplitConfig
from src.core.envsim.scenes import sample_domain_factor
from src.core.envsim.sim_typings import DomainFactor
from src.core.errors import ConfigError, ContractViolationError

SplitName = Literal["source", "seen", "unseen"]
SPLIT_NAMES: tuple[SplitName, ...] = ("source", "seen", "unseen")
MAX_DRAWS = 1000


@dataclass
class DomainSplit:
    """
    Domain factors per evaluation split.
    Parameters:
    - source - factors the policy is trained on
    - seen - factors used during representation learning only
    - unseen - factors that appear in no training dataset
    """

    source: list[DomainFactor]
    seen: list[DomainFactor]
    unseen: list[DomainFactor]

    def __post_init__(self):
        training = {_key(f) for f in self.source + self.seen}
        leaked = [f for f in self.unseen if _key(f) in training]
        if leaked:
            raise ConfigError(f"unseen factors also appear in training splits: {leaked}")

    def factors(self, name: SplitName) -> list[DomainFactor]:
        if name not in SPLIT_NAMES:
            raise ContractViolationError(f"unknown split {name!r}")
        return getattr(self, name)

    @property
    def representation_factors(self) -> list[DomainFactor]:
        """Factors the expert dataset is collected under: source first, then seen."""
        return self.source + self.seen

    def to_dict(self) -> dict[str, Any]:
        return {name: [f.to_dict() for f in self.factors(name)] for name in SPLIT_NAMES}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Self:
        return cls(**{name: [DomainFactor.from_dict(f) for f in data.get(name, [])] for name in SPLIT_NAMES})


def _key(factor: DomainFactor) -> tuple:
    return tuple(sorted(factor.to_dict().items()))


def build_split(config: SplitConfig) -> DomainSplit:
    """
    Explicit factor lists win; missing lists are drawn from the factor_seed stream.
    The first source factor defaults to the canonical domain and anchors alignment.
    """
    rng = np.random.default_rng(config.factor_seed)
    used: set[tuple] = set()

    def parse(items: list[dict[str, Any]]) -> list[DomainFactor]:
        try:
            factors = [DomainFactor.from_dict(item) for item in items]
        except (TypeError, ValueError) as error:
            raise ConfigError(f"invalid domain factor: {error}") from error
        used.update(_key(f) for f in factors)
        return factors

    def draw(count: int, canonical_first: bool = False) -> list[DomainFactor]:
        factors = []
        if canonical_first and count > 0 and _key(DomainFactor()) not in used:
            factors.append(DomainFactor())
            used.add(_key(DomainFactor()))
        for _ in range(MAX_DRAWS):
            if len(factors) == count:
                return factors
            factor = sample_domain_factor(rng)
            if _key(factor) not in used:
                factors.append(factor)
                used.add(_key(factor))
        raise ConfigError(f"could not draw {count} distinct domain factors")

    explicit = {name: getattr(config, name) for name in SPLIT_NAMES}
    parsed = {name: parse(items) for name, items in explicit.items() if items is not None}
    source = parsed.get("source") or draw(config.n_source, canonical_first=True)
    seen = parsed["seen"] if "seen" in parsed else draw(config.n_seen)
    unseen = parsed.get("unseen") or draw(config.n_unseen)
    if not source or not unseen:
        raise ConfigError("source and unseen splits must not be empty")
    return DomainSplit(source=source, seen=seen, unseen=unseen)
