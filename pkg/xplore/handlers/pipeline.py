"""
Подкоманда run: пайплайн целиком по TOML-конфигурации.

Флаги переопределяют значения из файла.
"""
import argparse

from xplore.handlers.common import add_backend_arguments, emit, existing_file, output_dir, run_async
from xplore.services.pipeline_service import load_pipeline_config, run_pipeline
from xplore.utils.formatters import format_run_report
from xplore.utils.logger import get_logger
from xplore.validators import argparse_type, validate_positive_integer, validate_seed

logger = get_logger("pipeline_handler")


def cmd_run(args: argparse.Namespace) -> int:
    cfg = load_pipeline_config(args.config, {
        "out_dir": args.out,
        "backend": args.backend,
        "cache_dir": args.cache_dir,
        "seed": args.seed,
        "prompt_budget": args.budget,
    })
    report = run_async(run_pipeline(cfg))
    emit(format_run_report(report))
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("run", help="Выполнить пайплайн по конфигурации")
    parser.add_argument("--config", type=existing_file, required=True, help="pipeline.toml")
    parser.add_argument("--out", type=output_dir, default=None, help="Каталог вывода")
    parser.add_argument("--seed", type=argparse_type(validate_seed), default=None)
    parser.add_argument("--budget", type=argparse_type(validate_positive_integer), default=None,
                        help="Бюджет контекста графа")
    add_backend_arguments(parser)
    parser.set_defaults(handler=cmd_run)
