"""
Вспомогательные функции: каноническая сериализация, хэши, атомарная запись.
"""
import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Iterator


def canonical_json(value: Any) -> str:
    """
    Каноническая JSON-строка: сортированные ключи, без пробелов, UTF-8 как есть.

    Example:
        >>> canonical_json({"b": 1, "a": [1, 2]})
        '{"a":[1,2],"b":1}'
    """
    return json.dumps(value, sort_keys=True, separators=(',', ':'), ensure_ascii=False)


def sha256_hex(data: bytes | str) -> str:
    """SHA-256 от байтов или строки (UTF-8)."""
    if isinstance(data, str):
        data = data.encode('utf-8')
    return hashlib.sha256(data).hexdigest()


def hash_file(path: Path) -> str:
    """SHA-256 содержимого файла."""
    digest = hashlib.sha256()
    with open(path, 'rb') as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b''):
            digest.update(chunk)
    return digest.hexdigest()


def atomic_write_text(path: Path, text: str) -> None:
    """
    Атомарная запись: временный файл в том же каталоге, затем os.replace.

    Параллельные читатели видят либо старое, либо новое содержимое целиком.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='\n') as fh:
            fh.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def dump_json(value: Any) -> str:
    """Детерминированный JSON-документ артефакта (отступ 2, перевод строки в конце)."""
    return json.dumps(value, indent=2, ensure_ascii=False) + "\n"


def write_json(path: Path, value: Any) -> None:
    """Записывает JSON-артефакт атомарно."""
    atomic_write_text(path, dump_json(value))


def read_json(path: Path) -> Any:
    """Читает JSON-файл."""
    with open(path, 'r', encoding='utf-8') as fh:
        return json.load(fh)


def write_jsonl(path: Path, rows: Iterable[Any]) -> None:
    """Записывает JSON Lines атомарно (одна запись на строку, ключи по порядку модели)."""
    text = "".join(json.dumps(row, ensure_ascii=False) + "\n" for row in rows)
    atomic_write_text(path, text)


def iter_jsonl(path: Path) -> Iterator[tuple[int, str]]:
    """
    Итерирует непустые строки JSON Lines файла.

    Yields:
        (номер строки с 1, текст строки)
    """
    with open(path, 'r', encoding='utf-8') as fh:
        for line_no, line in enumerate(fh, start=1):
            if line.strip():
                yield line_no, line


def word_count(value: Any) -> int:
    """
    Оценка размера в токенах: число слов, разделенных пробелами.

    Строки считаются по словам, числа и bool - по одному токену,
    вложенные dict/list обходятся рекурсивно (ключи dict тоже считаются).

    Example:
        >>> word_count({"question": "which page opens", "n": 3})
        6
    """
    if value is None:
        return 0
    if isinstance(value, str):
        return len(value.split())
    if isinstance(value, (bool, int, float)):
        return 1
    if isinstance(value, dict):
        return sum(word_count(k) + word_count(v) for k, v in value.items())
    if isinstance(value, (list, tuple)):
        return sum(word_count(v) for v in value)
    return len(str(value).split())
