"""
Модели индекса артефактов пайплайна (index.db, SQLite).

- ArtifactRecord: последний результат стадии (путь, хэш входов, хэш содержимого)
- RunRecord: история запусков пайплайна
"""
from datetime import datetime, timezone
import enum

from sqlalchemy import Column, DateTime, Enum, Integer, String, Text

from xplore.database.db import Base


# ============================================================================
# ENUM ТИПЫ
# ============================================================================

class RunStatus(str, enum.Enum):
    """Статус запуска пайплайна"""
    running = "running"  # Выполняется
    completed = "completed"  # Все стадии завершены
    failed = "failed"  # Стадия завершилась ошибкой


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


# ============================================================================
# МОДЕЛИ
# ============================================================================

class ArtifactRecord(Base):
    """
    Артефакт стадии.

    Стадия считается актуальной, если input_hash совпадает с хэшем
    текущих входов, а файл artifact существует и его хэш равен content_hash.
    """
    __tablename__ = "artifacts"

    id = Column(Integer, primary_key=True)
    stage = Column(String(32), nullable=False, unique=True, index=True)
    path = Column(Text, nullable=False)  # Относительно каталога артефактов
    input_hash = Column(String(64), nullable=False)
    content_hash = Column(String(64), nullable=False)
    updated_at = Column(DateTime(timezone=True), default=_utcnow, onupdate=_utcnow, nullable=False)

    def __repr__(self) -> str:
        return f"<ArtifactRecord(stage={self.stage}, input={self.input_hash[:8]})>"


class RunRecord(Base):
    """Запуск пайплайна."""
    __tablename__ = "runs"

    id = Column(Integer, primary_key=True)
    source_id = Column(String(255), nullable=False)
    seed = Column(Integer, nullable=False, default=0)
    backend = Column(String(32), nullable=False)
    model_identity = Column(String(255), nullable=True)  # mock, remote:<url>; NULL - replay
    status = Column(Enum(RunStatus), nullable=False, default=RunStatus.running)
    ran_stages = Column(Text, nullable=False, default="")  # Через запятую
    error = Column(Text, nullable=True)
    started_at = Column(DateTime(timezone=True), default=_utcnow, nullable=False)
    finished_at = Column(DateTime(timezone=True), nullable=True)

    def __repr__(self) -> str:
        return f"<RunRecord(id={self.id}, source={self.source_id}, status={self.status})>"
