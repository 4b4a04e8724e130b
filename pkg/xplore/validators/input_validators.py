"""
Валидаторы аргументов командной строки.

Каждый валидатор возвращает кортеж (валидно, значение, ошибка), как и
прочие валидаторы ввода; argparse_type() превращает его в type= для argparse.
- Пути (существующий файл, каталог вывода)
- Числа (целые в диапазоне, пороги в [0, 1], seed)
- Счетчики задач QA ("usage=2,seq_verify=3")
"""
import argparse
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple

from xplore.models.tasks import TaskKind
from xplore.utils.logger import get_logger

logger = get_logger("input_validators")

ValidationResult = Tuple[bool, Optional[object], str]


# ============================================================================
# ПАРСИНГ
# ============================================================================

def parse_float(input_text: str) -> Tuple[bool, Optional[float]]:
    """
    Парсинг float с поддержкой запятой как разделителя.

    Example:
        >>> parse_float("0,25")
        (True, 0.25)
        >>> parse_float("abc")
        (False, None)
    """
    if not input_text or not input_text.strip():
        return False, None
    try:
        return True, float(input_text.strip().replace(',', '.'))
    except ValueError:
        logger.debug(f"Не удалось распарсить число: '{input_text}'")
        return False, None


def parse_integer(input_text: str) -> Tuple[bool, Optional[int]]:
    if not input_text or not input_text.strip():
        return False, None
    try:
        return True, int(input_text.strip())
    except ValueError:
        return False, None


# ============================================================================
# ПУТИ
# ============================================================================

def validate_existing_file(input_text: str) -> Tuple[bool, Optional[Path], str]:
    """
    Путь к существующему файлу.

    Example:
        >>> validate_existing_file("")
        (False, None, '❌ Укажите путь к файлу')
    """
    if not input_text or not input_text.strip():
        return False, None, "❌ Укажите путь к файлу"
    path = Path(input_text.strip())
    if not path.exists():
        return False, None, f"❌ Файл не найден: {path}"
    if not path.is_file():
        return False, None, f"❌ Это не файл: {path}"
    return True, path, ""


def validate_output_dir(input_text: str) -> Tuple[bool, Optional[Path], str]:
    """Каталог вывода: может не существовать, но не должен быть файлом."""
    if not input_text or not input_text.strip():
        return False, None, "❌ Укажите каталог вывода"
    path = Path(input_text.strip())
    if path.exists() and not path.is_dir():
        return False, None, f"❌ Путь существует и не является каталогом: {path}"
    return True, path, ""


# ============================================================================
# ЧИСЛА
# ============================================================================

def validate_integer(
    input_text: str,
    min_value: int = 0,
    max_value: int = 1_000_000,
) -> Tuple[bool, Optional[int], str]:
    """
    Целое в диапазоне [min_value, max_value].

    Example:
        >>> validate_integer("5", min_value=1)
        (True, 5, '')
        >>> validate_integer("0", min_value=1)
        (False, None, '❌ Значение должно быть не менее 1')
    """
    is_valid, number = parse_integer(input_text)
    if not is_valid:
        return False, None, "❌ Ожидается целое число"
    if number < min_value:
        return False, None, f"❌ Значение должно быть не менее {min_value}"
    if number > max_value:
        return False, None, f"❌ Значение не должно превышать {max_value}"
    return True, number, ""


def validate_seed(input_text: str) -> Tuple[bool, Optional[int], str]:
    return validate_integer(input_text, min_value=0, max_value=2**32 - 1)


def validate_positive_integer(input_text: str) -> Tuple[bool, Optional[int], str]:
    return validate_integer(input_text, min_value=1)


def validate_threshold(input_text: str) -> Tuple[bool, Optional[float], str]:
    """Порог сходства или Y-Diff в [0, 1]."""
    is_valid, number = parse_float(input_text)
    if not is_valid:
        return False, None, "❌ Ожидается число"
    if not 0.0 <= number <= 1.0:
        return False, None, "❌ Порог должен быть в диапазоне [0, 1]"
    return True, number, ""


def validate_positive_float(input_text: str) -> Tuple[bool, Optional[float], str]:
    is_valid, number = parse_float(input_text)
    if not is_valid:
        return False, None, "❌ Ожидается число"
    if number <= 0:
        return False, None, "❌ Значение должно быть больше 0"
    return True, number, ""


# ============================================================================
# СЧЕТЧИКИ ЗАДАЧ
# ============================================================================

def validate_task_counts(input_text: str) -> Tuple[bool, Optional[Dict[str, int]], str]:
    """
    Число вопросов на задачу в формате "задача=N,задача=N".

    Example:
        >>> validate_task_counts("usage=2, seq_verify=1")
        (True, {'usage': 2, 'seq_verify': 1}, '')
        >>> validate_task_counts("foo=1")
        (False, None, '❌ Неизвестная задача: foo')
    """
    if not input_text or not input_text.strip():
        return False, None, "❌ Укажите задачи в формате задача=N"

    known = {kind.value for kind in TaskKind}
    counts: Dict[str, int] = {}
    for part in input_text.split(','):
        part = part.strip()
        if not part:
            continue
        if '=' not in part:
            return False, None, f"❌ Ожидается задача=N: '{part}'"
        name, _, value = (piece.strip() for piece in part.partition('='))
        if name not in known:
            return False, None, f"❌ Неизвестная задача: {name}"
        is_valid, count, error = validate_integer(value, min_value=0)
        if not is_valid:
            return False, None, f"{error} ({name})"
        counts[name] = count

    if not counts:
        return False, None, "❌ Укажите задачи в формате задача=N"
    return True, counts, ""


# ============================================================================
# ARGPARSE
# ============================================================================

def argparse_type(validator: Callable[[str], ValidationResult]) -> Callable[[str], object]:
    """
    Обертка валидатора для argparse: ошибка -> ArgumentTypeError.

    Example:
        parser.add_argument("--seed", type=argparse_type(validate_seed))
    """
    def convert(input_text: str) -> object:
        is_valid, value, error = validator(input_text)
        if not is_valid:
            raise argparse.ArgumentTypeError(error.removeprefix("❌ "))
        return value

    convert.__name__ = validator.__name__.removeprefix("validate_")
    return convert
