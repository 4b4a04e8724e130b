"""
Подключение к SQLite-индексу артефактов через SQLAlchemy.

Каждый каталог вывода пайплайна имеет собственный index.db, поэтому
engine создается на путь, а не глобально.
"""
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator

from sqlalchemy import Engine, create_engine as sa_create_engine
from sqlalchemy.orm import Session, sessionmaker

from xplore.config import settings
from xplore.database.models import Base
from xplore.utils.logger import get_logger

logger = get_logger("database")


def create_engine(db_path: Path) -> Engine:
    """
    Engine для файла SQLite.

    echo включается в режиме разработки при LOG_LEVEL=DEBUG.
    """
    db_path = Path(db_path)
    db_path.parent.mkdir(parents=True, exist_ok=True)
    return sa_create_engine(
        f"sqlite:///{db_path}",
        echo=settings.is_development() and settings.LOG_LEVEL == "DEBUG",
        future=True,
    )


def create_session_factory(engine: Engine) -> sessionmaker[Session]:
    return sessionmaker(engine, expire_on_commit=False, autoflush=False)


def create_tables(engine: Engine) -> None:
    """Создать таблицы индекса, если их нет."""
    Base.metadata.create_all(engine)
    logger.debug(f"Таблицы индекса готовы: {engine.url}")


@contextmanager
def session_scope(factory: sessionmaker[Session]) -> Iterator[Session]:
    """
    Сессия с commit при успехе и rollback при ошибке.

    Example:
        with session_scope(factory) as session:
            session.add(record)
    """
    session = factory()
    try:
        yield session
        session.commit()
    except Exception:
        session.rollback()
        raise
    finally:
        session.close()
