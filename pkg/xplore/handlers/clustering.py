"""
Подкоманда cluster: группировка экранов последовательности в узлы.
"""
import argparse

from xplore.exceptions import ClusterError
from xplore.handlers.common import add_backend_arguments, client_from_args, emit, existing_file, run_async
from xplore.models.clusters import ClusterMethod, RuleClusterConfig
from xplore.services.cluster_service import (
    assignment_quality,
    cluster_model,
    cluster_none,
    cluster_rule,
    partition_from_labels,
    save_clusters,
)
from xplore.services.ingest_service import load_frames, load_manifest
from xplore.services.sequence_service import attach_lumas, load_sequence, screens_from_sequence
from xplore.utils.formatters import format_clusters
from xplore.utils.logger import get_logger
from xplore.validators import argparse_type, validate_threshold

logger = get_logger("clustering_handler")

DEFAULTS = RuleClusterConfig()


async def _cluster_with_model(screens, args: argparse.Namespace):
    async with client_from_args(args) as client:
        return await cluster_model(screens, client, oracle_labels=args.oracle_labels)


def cmd_cluster(args: argparse.Namespace) -> int:
    sequence = load_sequence(args.sequence)
    if args.manifest:
        sequence = attach_lumas(sequence, load_frames(load_manifest(args.manifest)))
    screens = screens_from_sequence(sequence)

    method = ClusterMethod(args.method)
    if method == ClusterMethod.rule:
        if not args.manifest:
            raise ClusterError("Для правиловой кластеризации нужен --manifest (скриншоты)")
        assignment = cluster_rule(screens, RuleClusterConfig(tau_vh=args.tau_vh, tau_img=args.tau_img))
    elif method == ClusterMethod.model:
        assignment = run_async(_cluster_with_model(screens, args))
    else:
        assignment = cluster_none(screens)

    save_clusters(assignment, args.out)

    quality = None
    if all(screen.label is not None for screen in screens):
        quality = assignment_quality(assignment, partition_from_labels(screens))
    emit(format_clusters(assignment, quality))
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("cluster", help="Кластеризовать экраны в узлы графа")
    parser.add_argument("--sequence", type=existing_file, required=True)
    parser.add_argument("--manifest", type=existing_file, default=None, help="manifest.json (скриншоты для rule)")
    parser.add_argument("--method", choices=[m.value for m in ClusterMethod], default=ClusterMethod.rule.value)
    parser.add_argument("--tau-vh", type=argparse_type(validate_threshold), default=DEFAULTS.tau_vh)
    parser.add_argument("--tau-img", type=argparse_type(validate_threshold), default=DEFAULTS.tau_img)
    parser.add_argument("--oracle-labels", action="store_true", help="Передавать скрытые метки (синтетика)")
    parser.add_argument("--out", required=True, help="Куда записать clusters.json")
    add_backend_arguments(parser)
    parser.set_defaults(handler=cmd_cluster)
