"""
Настройки процесса xplore из окружения и .env.

Здесь только то, что относится к установке: адрес и кэш модели,
параллелизм, логирование, часовой пояс отчетов. Пороги, пути и метод
кластеризации конкретного прогона задаются в PipelineConfig
(xplore.models.pipeline) и читаются из TOML-файла.
"""

from pathlib import Path
from typing import Optional

import pytz
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

APP_ENVIRONMENTS = ("development", "staging", "production")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class Settings(BaseSettings):
    """Переменные окружения xplore (регистр важен)."""

    # ========================================================================
    # БЭКЕНД МОДЕЛИ
    # ========================================================================

    XPLORE_MODEL_URL: Optional[str] = Field(
        default=None,
        description="URL inference-сервера (POST /v1/infer); без него backend=auto выбирает mock"
    )

    XPLORE_CACHE_DIR: str = Field(
        default=".xplore_cache",
        description="Кэш ответов модели: <cache_dir>/<endpoint>/<request_id>.json"
    )

    MODEL_TIMEOUT: float = Field(
        default=60.0,
        gt=0,
        le=3600,
        description="Таймаут одного запроса к удаленному бэкенду, секунды"
    )

    MODEL_MAX_IN_FLIGHT: int = Field(
        default=4,
        ge=1,
        le=64,
        description="Одновременных запросов к удаленному бэкенду"
    )

    # ========================================================================
    # СТАДИИ
    # ========================================================================

    SEQUENCE_CONCURRENCY: int = Field(
        default=4,
        ge=1,
        le=64,
        description="Сегментов, для которых VH/действие генерируются одновременно"
    )

    QA_CONCURRENCY: int = Field(
        default=4,
        ge=1,
        le=64,
        description="Вопросов, на которые модель отвечает одновременно"
    )

    FRAME_DECODE_WORKERS: int = Field(
        default=4,
        ge=1,
        le=64,
        description="Потоков декодирования кадров"
    )

    PROMPT_BUDGET: int = Field(
        default=4000,
        ge=1,
        description="Бюджет контекста графа в промпте (слова)"
    )

    DEFAULT_SEED: int = Field(
        default=0,
        ge=0,
        description="Seed генераторов, если не задан флагом или в TOML"
    )

    # ========================================================================
    # ЛОГИ И ОТЧЕТЫ
    # ========================================================================

    LOG_LEVEL: str = Field(
        default="INFO",
        description="DEBUG, INFO, WARNING, ERROR или CRITICAL"
    )

    LOG_DIR: str = Field(
        default="logs",
        description="Каталог xplore.log и error.log"
    )

    LOG_TO_FILE: bool = Field(
        default=False,
        description="Писать файлы логов помимо stderr"
    )

    APP_ENV: str = Field(
        default="production",
        description="development (цветная консоль), staging или production"
    )

    TIMEZONE: str = Field(
        default="UTC",
        description="Часовой пояс started_at/finished_at в report.json"
    )

    def is_development(self) -> bool:
        return self.APP_ENV == "development"

    def cache_dir(self) -> Path:
        return Path(self.XPLORE_CACHE_DIR)

    model_config = SettingsConfigDict(
        env_file='.env',
        env_file_encoding='utf-8',
        case_sensitive=True,
        extra='ignore',
    )


settings = Settings()


# ============================================================================
# ДОСТУП И ПРОВЕРКА
# ============================================================================

def get_settings() -> Settings:
    return settings


def reload_settings() -> Settings:
    """Перечитать окружение (в тестах: monkeypatch.setenv, затем reload_settings())."""
    global settings
    settings = Settings()
    return settings


def validate_settings(current: Optional[Settings] = None) -> tuple[bool, list[str]]:
    """
    Проверить сочетания, которые не выражаются ограничениями полей.

    Returns:
        tuple: (is_valid, list_of_errors)
    """
    current = current or settings
    errors = []

    if current.APP_ENV not in APP_ENVIRONMENTS:
        errors.append(f"Invalid APP_ENV: {current.APP_ENV}")

    if current.LOG_LEVEL.upper() not in LOG_LEVELS:
        errors.append(f"Invalid LOG_LEVEL: {current.LOG_LEVEL}")

    if current.TIMEZONE not in pytz.all_timezones_set:
        errors.append(f"Unknown TIMEZONE: {current.TIMEZONE}")

    url = current.XPLORE_MODEL_URL
    if url is not None and not url.startswith(('http://', 'https://')):
        errors.append("XPLORE_MODEL_URL must be an http(s) URL")

    if current.cache_dir().is_file():
        errors.append(f"XPLORE_CACHE_DIR is a file: {current.XPLORE_CACHE_DIR}")

    return len(errors) == 0, errors


__all__ = [
    'Settings',
    'settings',
    'get_settings',
    'reload_settings',
    'validate_settings',
]


if __name__ != '__main__':
    is_valid, errors = validate_settings()
    if not is_valid:
        import warnings
        for error in errors:
            warnings.warn(f"Configuration error: {error}", UserWarning)
