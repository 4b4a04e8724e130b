"""
Базовый класс для SQLAlchemy моделей индекса артефактов.
"""

from sqlalchemy.orm import declarative_base

# Базовый класс для всех моделей
Base = declarative_base()

__all__ = ['Base']
