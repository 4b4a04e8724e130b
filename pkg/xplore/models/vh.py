"""
Модели иерархии представлений (View Hierarchy).
"""
import enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, RootModel, field_validator

Bounds = Tuple[int, int, int, int]


# ============================================================================
# ENUM ТИПЫ
# ============================================================================

class RecordSource(str, enum.Enum):
    """Откуда взята часть записи экрана/шага"""
    ground_truth = "ground_truth"  # Из трассы исследования
    generated = "generated"  # Сгенерирована моделью


# ============================================================================
# ДЕРЕВО
# ============================================================================

class VhNode(BaseModel):
    """Узел иерархии. Ключи JSON: class, id, text, bounds, clickable, children."""

    model_config = ConfigDict(frozen=True, populate_by_name=True, extra="forbid")

    class_name: str = Field(alias="class", min_length=1)
    resource_id: Optional[str] = Field(default=None, alias="id")
    text: Optional[str] = None
    bounds: Bounds
    clickable: bool = False
    children: Tuple["VhNode", ...] = ()

    @field_validator("bounds")
    @classmethod
    def _check_bounds(cls, value: Bounds) -> Bounds:
        left, top, right, bottom = value
        if left > right or top > bottom:
            raise ValueError(f"reversed bounds {list(value)}")
        return value

    @property
    def area(self) -> int:
        left, top, right, bottom = self.bounds
        return (right - left) * (bottom - top)

    def iter_preorder(self):
        """Обход в прямом порядке (итеративно, без рекурсии)."""
        stack: List[VhNode] = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


class ViewHierarchy(BaseModel):
    """Иерархия одного экрана: {"screen": [w, h], "root": {...}}."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    screen: Tuple[int, int]
    root: VhNode

    @field_validator("screen")
    @classmethod
    def _check_screen(cls, value: Tuple[int, int]) -> Tuple[int, int]:
        if value[0] < 1 or value[1] < 1:
            raise ValueError(f"screen dimensions must be >= 1, got {list(value)}")
        return value


class SimplifiedVh(RootModel[Tuple[str, ...]]):
    """
    Упрощенная иерархия: строки "depth|class|id|text|clickable".

    Сериализуется как список строк (поле vh_lines в sequence.json).
    """

    model_config = ConfigDict(frozen=True)

    @property
    def lines(self) -> Tuple[str, ...]:
        return self.root

    def __len__(self) -> int:
        return len(self.root)
