# xplore/__init__.py
"""
GUI Xplore Toolkit - от записи исследования приложения к графу переходов и QA.

Основные компоненты:
- models: доменные модели и документы артефактов
- services: бизнес-логика стадий (кадры, ключевые кадры, VH, граф, задачи)
- database: индекс артефактов и история запусков (SQLite)
- handlers: подкоманды CLI
- validators: проверка аргументов командной строки
- utils: логирование, хэши, форматирование
"""

__version__ = "1.0.0"

from .config import settings

__all__ = ["settings", "__version__"]
