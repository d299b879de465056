from datetime import datetime

from sqlalchemy import ForeignKey
from sqlalchemy.orm import Mapped, mapped_column, relationship

from src.db.database import Base


class ArtifactRecord(Base):
    __tablename__ = "ArtifactRecord"

    id: Mapped[int] = mapped_column(primary_key=True)
    run_id: Mapped[int] = mapped_column(ForeignKey("PipelineRun.id"), nullable=False)
    name: Mapped[str] = mapped_column(nullable=False)
    path: Mapped[str] = mapped_column(nullable=False)
    sha256: Mapped[str] = mapped_column(nullable=False)
    config_digest: Mapped[str] = mapped_column(nullable=False)
    creation_date: Mapped[datetime] = mapped_column(nullable=False)

    run: Mapped["PipelineRun"] = relationship("PipelineRun", back_populates="artifacts")  # type: ignore

    def __repr__(self):
        return f"ArtifactRecord(id={self.id}, name={self.name}, path={self.path})"
