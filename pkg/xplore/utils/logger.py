# xplore/utils/logger.py
"""
Логирование xplore.

- консоль (stderr): цветные уровни в development, stdout остается за
  результатами подкоманд (DOT, метрики, JSON)
- файлы в LOG_DIR: xplore.log (все уровни) и error.log (ERROR и выше),
  оба с ротацией по размеру
- логгеры сервисов живут в пространстве имен "xplore", на нем же
  пайплайн собирает предупреждения в report.json
"""

import asyncio
import logging
import sys
import time
from functools import wraps
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any, Callable, Optional

from xplore.config import settings

ROOT_NAMESPACE = "xplore"

CONSOLE_FORMAT = "%(levelname)-8s | %(name)-28s | %(message)s"
FILE_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)-30s | %(funcName)-20s | %(lineno)-4d | %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# Библиотеки, чей DEBUG не нужен даже при LOG_LEVEL=DEBUG
NOISY_LIBRARIES = ("sqlalchemy.engine", "aiohttp", "PIL", "asyncio")


class ColoredFormatter(logging.Formatter):
    """Окрашивает имя уровня ANSI-кодом; сама запись не меняется."""

    COLORS = {
        "DEBUG": "\033[36m",
        "INFO": "\033[32m",
        "WARNING": "\033[33m",
        "ERROR": "\033[31m",
        "CRITICAL": "\033[1;31m",
    }
    RESET = "\033[0m"

    def format(self, record: logging.LogRecord) -> str:
        levelname = record.levelname
        record.levelname = f"{self.COLORS.get(levelname, self.RESET)}{levelname}{self.RESET}"
        try:
            return super().format(record)
        finally:
            record.levelname = levelname


def _rotating(path: Path, level: int, max_mb: int, backups: int) -> RotatingFileHandler:
    handler = RotatingFileHandler(path, maxBytes=max_mb * 1024 * 1024, backupCount=backups, encoding="utf-8")
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(FILE_FORMAT, datefmt=DATE_FORMAT))
    return handler


def setup_logging(
    log_level: Optional[str] = None,
    log_dir: Optional[str] = None,
    enable_file_logging: Optional[bool] = None,
    enable_console_logging: bool = True,
) -> None:
    """
    Настроить корневой логгер для запуска CLI.

    Args:
        log_level: уровень (по умолчанию settings.LOG_LEVEL)
        log_dir: каталог файлов логов (по умолчанию settings.LOG_DIR)
        enable_file_logging: писать файлы (по умолчанию settings.LOG_TO_FILE)
        enable_console_logging: писать в stderr
    """
    log_level = (log_level or settings.LOG_LEVEL).upper()
    if enable_file_logging is None:
        enable_file_logging = settings.LOG_TO_FILE

    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)
    root_logger.handlers.clear()

    if enable_console_logging:
        console = logging.StreamHandler(sys.stderr)
        console.setLevel(log_level)
        formatter_cls = ColoredFormatter if settings.is_development() else logging.Formatter
        console.setFormatter(formatter_cls(CONSOLE_FORMAT, datefmt=DATE_FORMAT))
        root_logger.addHandler(console)

    if enable_file_logging:
        log_path = Path(log_dir or settings.LOG_DIR)
        log_path.mkdir(parents=True, exist_ok=True)
        root_logger.addHandler(_rotating(log_path / "xplore.log", logging.DEBUG, max_mb=10, backups=5))
        root_logger.addHandler(_rotating(log_path / "error.log", logging.ERROR, max_mb=5, backups=10))

    for name in NOISY_LIBRARIES:
        logging.getLogger(name).setLevel(logging.WARNING)

    get_logger("logger").debug(f"✅ Логирование: уровень={log_level}, файлы={enable_file_logging}")


def get_logger(name: str) -> logging.Logger:
    """
    Логгер сервиса в пространстве имен xplore.

    Example:
        >>> get_logger("graph_service").name
        'xplore.graph_service'
    """
    if name == ROOT_NAMESPACE or name.startswith(f"{ROOT_NAMESPACE}."):
        return logging.getLogger(name)
    return logging.getLogger(f"{ROOT_NAMESPACE}.{name}")


def log_stage_timing(logger: logging.Logger, stage_name: str) -> Callable:
    """Декоратор: DEBUG-запись о старте и длительности стадии (sync и async)."""
    def decorator(func: Callable) -> Callable:
        def finished(started: float) -> None:
            logger.debug(f"🟢 {stage_name} | {time.perf_counter() - started:.3f}s")

        if asyncio.iscoroutinefunction(func):
            @wraps(func)
            async def async_wrapper(*args: Any, **kwargs: Any) -> Any:
                started = time.perf_counter()
                logger.debug(f"🔵 Старт: {stage_name}")
                try:
                    return await func(*args, **kwargs)
                finally:
                    finished(started)

            return async_wrapper

        @wraps(func)
        def sync_wrapper(*args: Any, **kwargs: Any) -> Any:
            started = time.perf_counter()
            logger.debug(f"🔵 Старт: {stage_name}")
            try:
                return func(*args, **kwargs)
            finally:
                finished(started)

        return sync_wrapper

    return decorator
