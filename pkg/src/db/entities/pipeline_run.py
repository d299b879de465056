from datetime import datetime
from enum import Enum

from sqlalchemy.orm import Mapped, mapped_column, relationship

from src.db.database import Base


class RunStatus(Enum):
    PENDING = "PENDING"
    RUNNING = "RUNNING"
    FINISHED = "FINISHED"
    FAILED = "FAILED"


class PipelineRun(Base):
    __tablename__ = "PipelineRun"

    id: Mapped[int] = mapped_column(primary_key=True)
    command: Mapped[str] = mapped_column(nullable=False)
    status: Mapped[RunStatus] = mapped_column(nullable=False)
    seed: Mapped[int] = mapped_column(nullable=False)
    config_digest: Mapped[str] = mapped_column(nullable=False)
    out_dir: Mapped[str] = mapped_column(nullable=False)
    message: Mapped[str] = mapped_column(nullable=True)
    started_at: Mapped[datetime] = mapped_column(nullable=False)
    finished_at: Mapped[datetime] = mapped_column(nullable=True)

    artifacts: Mapped[list["ArtifactRecord"]] = relationship(  # type: ignore
        "ArtifactRecord", back_populates="run"
    )

    def __repr__(self):
        return f"PipelineRun(id={self.id}, command={self.command}, status={self.status.value})"
