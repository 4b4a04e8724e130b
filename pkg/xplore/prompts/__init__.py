"""
Шаблоны промптов (templates.toml).

Шаблоны ненормативны: формулировки можно менять, не трогая алгоритмы.
"""
import hashlib
from functools import lru_cache
from importlib import resources
from typing import Any, Dict

import sys

if sys.version_info >= (3, 11):
    import tomllib
else:  # Python 3.10: API-compatible backport
    import tomli as tomllib


@lru_cache(maxsize=1)
def load_templates() -> Dict[str, Any]:
    """Прочитать templates.toml из пакета (кэшируется)."""
    text = resources.files(__name__).joinpath("templates.toml").read_text(encoding="utf-8")
    return tomllib.loads(text)


@lru_cache(maxsize=1)
def templates_digest() -> str:
    """SHA-256 текста templates.toml: входит в хэш стадий, которые строят промпты."""
    data = resources.files(__name__).joinpath("templates.toml").read_bytes()
    return hashlib.sha256(data).hexdigest()
