"""
Общие аргументы и помощники подкоманд CLI.
"""
import argparse
import asyncio
import sys
from typing import Any, Coroutine, Optional, TypeVar

from xplore.models.inference import BackendChoice
from xplore.services.model_client_service import ModelClient, create_client
from xplore.validators import argparse_type, validate_existing_file, validate_output_dir

T = TypeVar("T")

existing_file = argparse_type(validate_existing_file)
output_dir = argparse_type(validate_output_dir)


def add_backend_arguments(parser: argparse.ArgumentParser) -> None:
    """--backend и --cache-dir для команд, обращающихся к модели."""
    parser.add_argument(
        "--backend",
        choices=[choice.value for choice in BackendChoice],
        default=None,
        help="Бэкенд модели: auto (remote при XPLORE_MODEL_URL, иначе mock), mock, remote, replay",
    )
    parser.add_argument(
        "--cache-dir",
        type=output_dir,
        default=None,
        help="Каталог кэша ответов (по умолчанию XPLORE_CACHE_DIR)",
    )


def client_from_args(args: argparse.Namespace) -> ModelClient:
    return create_client(BackendChoice(args.backend or BackendChoice.auto), args.cache_dir)


def run_async(coro: Coroutine[Any, Any, T]) -> T:
    return asyncio.run(coro)


def emit(text: str, out: Optional[Any] = None) -> None:
    """Результат команды - в stdout (логи идут в stderr)."""
    print(text, file=out or sys.stdout)
