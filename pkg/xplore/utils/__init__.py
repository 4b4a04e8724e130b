"""
Вспомогательные функции и утилиты.
"""

from .helpers import (
    atomic_write_text,
    canonical_json,
    hash_file,
    read_json,
    sha256_hex,
    write_json,
    write_jsonl,
)

from .formatters import (
    format_clusters,
    format_graph,
    format_keyframes,
    format_metrics,
    format_reduction,
    format_run_report,
    format_tokens,
)

from .logger import get_logger, setup_logging

__all__ = [
    # helpers
    "atomic_write_text",
    "canonical_json",
    "hash_file",
    "read_json",
    "sha256_hex",
    "write_json",
    "write_jsonl",
    # formatters
    "format_clusters",
    "format_graph",
    "format_keyframes",
    "format_metrics",
    "format_reduction",
    "format_run_report",
    "format_tokens",
    # logger
    "get_logger",
    "setup_logging",
]
