"""
Командная строка GUI Xplore Toolkit.

    xplore <подкоманда> [флаги]

Коды выхода: 0 - успех, 1 - ошибка входных данных, 2 - отказ бэкенда модели.
"""
import argparse
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from xplore import __version__
from xplore.exceptions import XploreException
from xplore.handlers import HANDLER_MODULES
from xplore.utils.logger import get_logger, setup_logging

logger = get_logger("cli")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_BACKEND = 2


def build_parser() -> argparse.ArgumentParser:
    """Парсер со всеми подкомандами."""
    parser = argparse.ArgumentParser(
        prog="xplore",
        description="От записи исследования GUI к графу переходов и вопросам по приложению",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        default=None,
        help="Уровень логирования (по умолчанию LOG_LEVEL)",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="<подкоманда>", required=True)
    for module in HANDLER_MODULES:
        module.register(subparsers)
    return parser


def exit_code_for(error: BaseException) -> int:
    """Код выхода для исключения."""
    if isinstance(error, XploreException):
        return getattr(error, "exit_code", EXIT_VALIDATION)
    return EXIT_VALIDATION


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(log_level=args.log_level)

    try:
        return args.handler(args)
    except XploreException as e:
        code = exit_code_for(e)
        logger.error(f"❌ {e}")
        return code
    except (ValidationError, ValueError, OSError) as e:
        logger.error(f"❌ Некорректные входные данные: {e}")
        return EXIT_VALIDATION
    except KeyboardInterrupt:
        logger.warning("⚠️ Прервано пользователем")
        return 130


def run() -> None:
    """Точка входа console script."""
    sys.exit(main())


if __name__ == "__main__":
    run()
