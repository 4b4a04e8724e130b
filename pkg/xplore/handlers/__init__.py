"""
Подкоманды CLI.

Каждый модуль экспортирует register(subparsers), добавляющий свои
подкоманды; cli.py регистрирует их по порядку HANDLER_MODULES.
"""
from . import clustering, graph, keyframes, pipeline, qa, sequence, simulate

HANDLER_MODULES = (
    keyframes,
    sequence,
    clustering,
    graph,
    qa,
    simulate,
    pipeline,
)

__all__ = [
    "HANDLER_MODULES",
    "clustering",
    "graph",
    "keyframes",
    "pipeline",
    "qa",
    "sequence",
    "simulate",
]
