import csv
import json
import logging
import os
from pathlib import Path
from typing import Any, Iterable, Sequence

from src.core.errors import ConfigError

LOG_LEVEL_ENV = "CAPO_LOG_LEVEL"
LOG_LEVELS = {"debug": logging.DEBUG, "info": logging.INFO, "warn": logging.WARNING}
DIGEST_COMMENT = "# config_digest="


def log_level_from_env() -> int:
    name = os.environ.get(LOG_LEVEL_ENV, "info").strip().lower()
    if name not in LOG_LEVELS:
        raise ConfigError(f"{LOG_LEVEL_ENV} must be one of {sorted(LOG_LEVELS)}, got {name!r}")
    return LOG_LEVELS[name]


def setup_logging(out_dir: Path | str, command: str, level: int | None = None) -> Path:
    """Route the root logger to <out>/logs/<command>.logs, truncated per run."""
    path = Path(out_dir) / "logs" / f"{command}.logs"
    path.parent.mkdir(parents=True, exist_ok=True)
    logging.basicConfig(
        level=level if level is not None else log_level_from_env(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
        filename=path,
        filemode="w",
        encoding="utf-8",
    )
    return path


def progress_enabled() -> bool:
    return logging.getLogger().getEffectiveLevel() <= logging.INFO


class JsonlWriter:
    """
    Appends one JSON object per line; a None path makes every write a no-op.
    Every record is stamped with config_digest when one is given.
    """

    def __init__(self, path: Path | str | None, config_digest: str | None = None):
        self.path = Path(path) if path is not None else None
        self.config_digest = config_digest
        self._file = None
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._file = self.path.open("w", encoding="utf-8")

    def write(self, record: dict[str, Any]) -> None:
        if self._file is not None:
            if self.config_digest is not None:
                record = {**record, "config_digest": self.config_digest}
            self._file.write(json.dumps(record) + "\n")

    def close(self) -> None:
        if self._file is not None:
            self._file.close()
            self._file = None

    def __enter__(self) -> "JsonlWriter":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def read_jsonl(path: Path | str) -> list[dict[str, Any]]:
    with Path(path).open("r", encoding="utf-8") as file:
        return [json.loads(line) for line in file if line.strip()]


def write_csv(
    path: Path | str,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    config_digest: str | None = None,
) -> Path:
    """CSV with an optional leading `# config_digest=<hex>` comment line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as file:
        if config_digest is not None:
            file.write(f"{DIGEST_COMMENT}{config_digest}\n")
        writer = csv.writer(file)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def read_csv(path: Path | str) -> list[dict[str, str]]:
    with Path(path).open("r", encoding="utf-8", newline="") as file:
        return list(csv.DictReader(line for line in file if not line.startswith("#")))


def write_json(path: Path | str, payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as file:
        json.dump(payload, file, indent=2, sort_keys=True)
    return path


def artifact_digest(path: Path | str) -> str | None:
    """Config digest embedded in a CSV comment, a JSON object or the first JSON-lines record."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as file:
        first = file.readline()
        if path.suffix == ".csv":
            return first.strip()[len(DIGEST_COMMENT) :] if first.startswith(DIGEST_COMMENT) else None
        if path.suffix == ".jsonl":
            return json.loads(first).get("config_digest") if first.strip() else None
        file.seek(0)
        payload = json.load(file)
    return payload.get("config_digest") if isinstance(payload, dict) else None
