from datetime import datetime, timezone
from typing import Iterable

from sqlalchemy import Engine, select
from sqlalchemy.orm import Session

from src.core.checkpoint import file_sha256
from src.core.phases.phase_typings import Artifact
from src.db.database import init_db
from src.db.entities import ArtifactRecord, PipelineRun, RunStatus


def _now() -> datetime:
    return datetime.now(timezone.utc).replace(tzinfo=None)


class RunRegistry:
    """Records every command invocation and the artifacts it produced."""

    def __init__(self, engine: Engine):
        self._engine = engine
        init_db(engine)

    def start(self, command: str, seed: int, config_digest: str, out_dir: str) -> int:
        with Session(self._engine) as session:
            run = PipelineRun(
                command=command,
                status=RunStatus.RUNNING,
                seed=seed,
                config_digest=config_digest,
                out_dir=out_dir,
                started_at=_now(),
            )
            session.add(run)
            session.commit()
            return run.id

    def finish(
        self,
        run_id: int,
        artifacts: Iterable[Artifact],
        config_digest: str,
        status: RunStatus = RunStatus.FINISHED,
        message: str | None = None,
    ) -> None:
        with Session(self._engine) as session:
            run = session.get(PipelineRun, run_id)
            run.status = status
            run.message = message
            run.finished_at = _now()
            for artifact in artifacts:
                if not artifact.exists:
                    continue
                session.add(
                    ArtifactRecord(
                        run_id=run_id,
                        name=artifact.name,
                        path=str(artifact.path),
                        sha256=file_sha256(artifact.path),
                        config_digest=config_digest,
                        creation_date=_now(),
                    )
                )
            session.commit()

    def runs(self, command: str | None = None) -> list[PipelineRun]:
        with Session(self._engine, expire_on_commit=False) as session:
            query = select(PipelineRun).order_by(PipelineRun.id)
            if command is not None:
                query = query.where(PipelineRun.command == command)
            return list(session.scalars(query))

    def artifacts(self, run_id: int) -> list[ArtifactRecord]:
        with Session(self._engine) as session:
            query = select(ArtifactRecord).where(ArtifactRecord.run_id == run_id).order_by(ArtifactRecord.id)
            records = list(session.scalars(query))
            session.expunge_all()
            return records
