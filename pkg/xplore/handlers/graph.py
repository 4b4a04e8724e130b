"""
Подкоманды графа переходов.

- build-graph: граф из последовательности и кластеров
- export-dot: DOT-представление graph.json в stdout или файл
"""
import argparse

from xplore.handlers.common import emit, existing_file
from xplore.services.cluster_service import load_clusters
from xplore.services.graph_service import build_graph, export_dot, load_graph, save_graph
from xplore.services.sequence_service import load_sequence
from xplore.utils.formatters import format_graph
from xplore.utils.helpers import atomic_write_text
from xplore.utils.logger import get_logger

logger = get_logger("graph_handler")


def cmd_build_graph(args: argparse.Namespace) -> int:
    g = build_graph(load_sequence(args.sequence), load_clusters(args.clusters))
    save_graph(g, args.out)
    if args.dot:
        atomic_write_text(args.dot, export_dot(g))
    emit(format_graph(g))
    return 0


def cmd_export_dot(args: argparse.Namespace) -> int:
    dot = export_dot(load_graph(args.graph))
    if args.out:
        atomic_write_text(args.out, dot)
        logger.info(f"💾 DOT записан: {args.out}")
    else:
        emit(dot.rstrip("\n"))
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    build = subparsers.add_parser("build-graph", help="Построить граф переходов")
    build.add_argument("--sequence", type=existing_file, required=True)
    build.add_argument("--clusters", type=existing_file, required=True)
    build.add_argument("--out", required=True, help="Куда записать graph.json")
    build.add_argument("--dot", default=None, help="Дополнительно записать graph.dot")
    build.set_defaults(handler=cmd_build_graph)

    export = subparsers.add_parser("export-dot", help="Экспорт graph.json в DOT")
    export.add_argument("--graph", type=existing_file, required=True)
    export.add_argument("--out", default=None, help="Файл (по умолчанию stdout)")
    export.set_defaults(handler=cmd_export_dot)
