"""
Индекс артефактов пайплайна:
    from xplore.database import ArtifactRecord, create_engine, session_scope
"""

from .connection import create_engine, create_session_factory, create_tables, session_scope
from .db import Base
from .models import ArtifactRecord, RunRecord, RunStatus

__all__ = [
    'Base',
    'ArtifactRecord',
    'RunRecord',
    'RunStatus',
    'create_engine',
    'create_session_factory',
    'create_tables',
    'session_scope',
]
