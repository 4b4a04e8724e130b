"""
Хранилище артефактов пайплайна с индексом в SQLite.

Раскладка каталога вывода:
    <out>/artifacts/   - файлы стадий (детерминированное дерево)
    <out>/index.db     - индекс: стадия -> пути, хэш входов, хэш содержимого
    <out>/report.json  - отчет последнего запуска

Стадия актуальна, если хэш ее входов не изменился, а файлы на месте
и совпадают с записанным хэшем содержимого.
"""
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional, Sequence

from sqlalchemy import select

from xplore.database import (
    ArtifactRecord,
    RunRecord,
    RunStatus,
    create_engine,
    create_session_factory,
    create_tables,
    session_scope,
)
from xplore.utils.helpers import hash_file, sha256_hex
from xplore.utils.logger import get_logger

logger = get_logger("artifact_service")

ARTIFACTS_DIR = "artifacts"
INDEX_FILE = "index.db"
REPORT_FILE = "report.json"
PATH_SEPARATOR = "\n"


class ArtifactStore:
    """Индекс артефактов одного каталога вывода."""

    def __init__(self, out_dir: Path):
        self.root = Path(out_dir)
        self.artifacts_dir = self.root / ARTIFACTS_DIR
        self.artifacts_dir.mkdir(parents=True, exist_ok=True)
        self._engine = create_engine(self.root / INDEX_FILE)
        create_tables(self._engine)
        self._sessions = create_session_factory(self._engine)

    # ------------------------------------------------------------------
    # Пути и хэши
    # ------------------------------------------------------------------

    def path(self, name: str) -> Path:
        """Абсолютный путь артефакта по имени файла."""
        return self.artifacts_dir / name

    def content_hash(self, names: Sequence[str]) -> Optional[str]:
        """Хэш содержимого набора файлов; None - какого-то файла нет."""
        digests: List[str] = []
        for name in names:
            path = self.path(name)
            if not path.is_file():
                return None
            digests.append(f"{name}:{hash_file(path)}")
        return sha256_hex(PATH_SEPARATOR.join(digests))

    # ------------------------------------------------------------------
    # Стадии
    # ------------------------------------------------------------------

    def recorded_hash(self, stage: str) -> Optional[str]:
        """Хэш содержимого, записанный для стадии (None - записи нет)."""
        with session_scope(self._sessions) as session:
            record = session.scalar(select(ArtifactRecord).where(ArtifactRecord.stage == stage))
            return record.content_hash if record else None

    def is_fresh(self, stage: str, input_hash: str, names: Sequence[str]) -> bool:
        """
        Стадия актуальна: те же входы, те же файлы, содержимое не менялось.
        """
        with session_scope(self._sessions) as session:
            record = session.scalar(select(ArtifactRecord).where(ArtifactRecord.stage == stage))
            if record is None:
                return False
            if record.input_hash != input_hash or record.path != PATH_SEPARATOR.join(names):
                return False
            expected = record.content_hash
        actual = self.content_hash(names)
        if actual != expected:
            logger.info(f"♻️ Артефакт стадии {stage} изменен или удален")
            return False
        return True

    def commit(self, stage: str, input_hash: str, names: Sequence[str]) -> str:
        """
        Записать результат стадии в индекс.

        Returns:
            str: хэш содержимого артефактов
        """
        content = self.content_hash(names)
        if content is None:
            raise FileNotFoundError(f"артефакты стадии {stage} не записаны: {list(names)}")
        with session_scope(self._sessions) as session:
            record = session.scalar(select(ArtifactRecord).where(ArtifactRecord.stage == stage))
            if record is None:
                record = ArtifactRecord(stage=stage)
                session.add(record)
            record.path = PATH_SEPARATOR.join(names)
            record.input_hash = input_hash
            record.content_hash = content
            record.updated_at = datetime.now(timezone.utc)
        logger.debug(f"Стадия {stage}: входы {input_hash[:8]}, содержимое {content[:8]}")
        return content

    def invalidate(self, stage: str) -> None:
        with session_scope(self._sessions) as session:
            record = session.scalar(select(ArtifactRecord).where(ArtifactRecord.stage == stage))
            if record is not None:
                session.delete(record)

    def stages(self) -> List[str]:
        with session_scope(self._sessions) as session:
            return list(session.scalars(select(ArtifactRecord.stage).order_by(ArtifactRecord.id)))

    # ------------------------------------------------------------------
    # Запуски
    # ------------------------------------------------------------------

    def start_run(self, source_id: str, seed: int, backend: str, model_identity: Optional[str] = None) -> int:
        with session_scope(self._sessions) as session:
            run = RunRecord(
                source_id=source_id, seed=seed, backend=backend,
                model_identity=model_identity, status=RunStatus.running,
            )
            session.add(run)
            session.flush()
            return run.id

    def finish_run(
        self,
        run_id: int,
        ran_stages: Sequence[str],
        error: Optional[str] = None,
        source_id: Optional[str] = None,
    ) -> None:
        with session_scope(self._sessions) as session:
            run = session.get(RunRecord, run_id)
            if run is None:
                return
            run.status = RunStatus.failed if error else RunStatus.completed
            run.ran_stages = ",".join(ran_stages)
            run.error = error
            if source_id:
                run.source_id = source_id
            run.finished_at = datetime.now(timezone.utc)

    def last_model_identity(self) -> Optional[str]:
        """Бэкенд последнего запуска, который обращался к модели (для replay)."""
        with session_scope(self._sessions) as session:
            return session.scalar(
                select(RunRecord.model_identity)
                .where(RunRecord.model_identity.is_not(None))
                .order_by(RunRecord.id.desc())
                .limit(1)
            )

    def runs(self) -> List[RunRecord]:
        with session_scope(self._sessions) as session:
            return list(session.scalars(select(RunRecord).order_by(RunRecord.id)))

    def close(self) -> None:
        self._engine.dispose()

    def __enter__(self) -> "ArtifactStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
