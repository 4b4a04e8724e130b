"""
Расчеты, общие для нескольких сервисов.

Модуль содержит чистые математические функции:
- Нормированная средняя абсолютная разность яркости (ядро Y-Diff)
- Мультимножественный коэффициент Жаккара
- IoU прямоугольников
- Индекс Рэнда для сравнения разбиений
"""
from collections import Counter
from itertools import combinations
from typing import Hashable, Mapping, Sequence, Tuple

import numpy as np

Bounds = Tuple[int, int, int, int]


# ============================================================================
# ЯРКОСТЬ
# ============================================================================

def mean_abs_luma_diff(a: np.ndarray, b: np.ndarray) -> float:
    """
    Средняя абсолютная разность двух uint8-плоскостей, нормированная в [0, 1].

    Формула: sum(|b - a|) / (255 * width * height)

    Example:
        >>> mean_abs_luma_diff(np.array([[0, 0]], np.uint8), np.array([[0, 255]], np.uint8))
        0.5
    """
    total = int(np.abs(b.astype(np.int16) - a.astype(np.int16)).sum(dtype=np.int64))
    return total / (255.0 * a.size)


def batch_mean_abs_luma_diff(stack: np.ndarray) -> np.ndarray:
    """
    Y-Diff для всех соседних пар стека (n, h, w) за один проход numpy.

    Returns:
        np.ndarray: массив длины n-1 со значениями в [0, 1]
    """
    n = stack.shape[0]
    pixels = stack.shape[1] * stack.shape[2]
    diffs = np.abs(np.diff(stack.astype(np.int16), axis=0)).reshape(n - 1, -1)
    return diffs.sum(axis=1, dtype=np.int64) / (255.0 * pixels)


# ============================================================================
# МНОЖЕСТВА И РАЗБИЕНИЯ
# ============================================================================

def multiset_jaccard(a: Counter, b: Counter) -> float:
    """
    Мультимножественный Жаккар: |A ∩ B| / |A ∪ B| (min/max кратностей).

    Оба мультимножества пусты - 1.0.

    Example:
        >>> multiset_jaccard(Counter("xxy"), Counter("xyz"))
        0.5
    """
    union = sum((a | b).values())
    if union == 0:
        return 1.0
    return sum((a & b).values()) / union


def iou(a: Bounds, b: Bounds) -> float:
    """
    Intersection over Union двух прямоугольников (left, top, right, bottom).

    Вырожденные прямоугольники с нулевым объединением дают 1.0 при полном совпадении.
    """
    left, top = max(a[0], b[0]), max(a[1], b[1])
    right, bottom = min(a[2], b[2]), min(a[3], b[3])
    inter = max(0, right - left) * max(0, bottom - top)
    area_a = (a[2] - a[0]) * (a[3] - a[1])
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    union = area_a + area_b - inter
    if union <= 0:
        return 1.0 if tuple(a) == tuple(b) else 0.0
    return inter / union


def rand_index(pred: Mapping[int, Hashable], gt: Mapping[int, Hashable]) -> float:
    """
    Индекс Рэнда: доля пар элементов, по которым разбиения согласны.

    Меньше двух элементов - 1.0 (несогласных пар нет).
    """
    items: Sequence[int] = sorted(pred)
    if len(items) < 2:
        return 1.0
    agree = 0
    total = 0
    for x, y in combinations(items, 2):
        total += 1
        if (pred[x] == pred[y]) == (gt[x] == gt[y]):
            agree += 1
    return agree / total


def same_partition(pred: Mapping[int, Hashable], gt: Mapping[int, Hashable]) -> bool:
    """Разбиения совпадают с точностью до переименования меток."""
    def blocks(labels: Mapping[int, Hashable]) -> set[frozenset[int]]:
        grouped: dict[Hashable, set[int]] = {}
        for item, label in labels.items():
            grouped.setdefault(label, set()).add(item)
        return {frozenset(block) for block in grouped.values()}

    return blocks(pred) == blocks(gt)
