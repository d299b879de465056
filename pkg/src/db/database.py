import os
from pathlib import Path

from sqlalchemy import Engine, create_engine
from sqlalchemy.orm import DeclarativeBase

DB_URL_ENV = "CAPO_DB_URL"


def connection_string(out_dir: Path | str) -> str:
    """CAPO_DB_URL when set, else a SQLite registry next to the run artifacts."""
    url = os.getenv(DB_URL_ENV)
    if url:
        return url
    path = Path(out_dir) / "registry.db"
    path.parent.mkdir(parents=True, exist_ok=True)
    return f"sqlite:///{path}"


def create_registry_engine(out_dir: Path | str, echo: bool = False) -> Engine:
    return create_engine(connection_string(out_dir), echo=echo)


class Base(DeclarativeBase):
    pass


def init_db(engine: Engine) -> None:
    with engine.begin() as conn:
        Base.metadata.create_all(conn)
