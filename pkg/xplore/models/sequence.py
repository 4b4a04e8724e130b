"""
Модели последовательности исследования: действие, запись экрана, шаг,
последовательность и событие трассы (trace.jsonl).
"""
import enum
import json
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, InstanceOf, model_validator

from xplore.models.frames import LumaPlane
from xplore.models.vh import Bounds, RecordSource, SimplifiedVh, ViewHierarchy


# ============================================================================
# ENUM ТИПЫ
# ============================================================================

class ActionKind(str, enum.Enum):
    """Тип действия пользователя"""
    tap = "tap"  # Нажатие
    long_tap = "long_tap"  # Долгое нажатие
    scroll = "scroll"  # Прокрутка
    text_input = "text_input"  # Ввод текста
    back = "back"  # Кнопка "назад"
    swipe = "swipe"  # Свайп


TARGETED_KINDS = frozenset({ActionKind.tap, ActionKind.long_tap})


# ============================================================================
# ДЕЙСТВИЕ
# ============================================================================

class ElementRef(BaseModel):
    """Ссылка на элемент: resource_id и/или bounds."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    resource_id: Optional[str] = None
    bounds: Optional[Bounds] = None

    @model_validator(mode="after")
    def _check_present(self) -> "ElementRef":
        if self.resource_id is None and self.bounds is None:
            raise ValueError("element reference needs resource_id or bounds")
        return self

    def describe(self) -> str:
        if self.resource_id:
            return self.resource_id
        return "[" + ",".join(str(v) for v in self.bounds or ()) + "]"


class Action(BaseModel):
    """
    Действие на экране.

    tap/long_tap требуют target, back - не допускает target.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: ActionKind
    target: Optional[ElementRef] = None
    params: Optional[str] = None

    @model_validator(mode="after")
    def _check_target(self) -> "Action":
        if self.kind in TARGETED_KINDS and self.target is None:
            raise ValueError(f"{self.kind.value} requires a target")
        if self.kind == ActionKind.back and self.target is not None:
            raise ValueError("back takes no target")
        return self

    def describe(self) -> str:
        """
        Короткое текстовое описание для промптов и DOT.

        Example:
            >>> Action(kind="tap", target={"resource_id": "home_btn0"}).describe()
            'tap home_btn0'
        """
        parts = [self.kind.value]
        if self.target is not None:
            parts.append(self.target.describe())
        if self.params:
            parts.append(self.params)
        return " ".join(parts)

    def identity(self) -> str:
        """Каноничный JSON действия: различает bounds при общем resource_id и params None/''."""
        return json.dumps(self.model_dump(mode="json", exclude_none=True), sort_keys=True, separators=(",", ":"))

    def sort_key(self) -> Tuple[str, str, str]:
        """Порядок для вывода; равные ключи не означают равные действия."""
        target = self.target.describe() if self.target is not None else ""
        return self.kind.value, target, self.params or ""


# ============================================================================
# ЗАПИСИ ПОСЛЕДОВАТЕЛЬНОСТИ
# ============================================================================

class ScreenRecord(BaseModel):
    """
    Экран в ключевом кадре.

    luma не сериализуется: после загрузки sequence.json плоскости
    подставляются из кадров (sequence_service.attach_lumas).
    label - скрытая метка экрана (только для синтетических корпусов).
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True, arbitrary_types_allowed=True)

    keyframe_index: int = Field(alias="frame", ge=0)
    vh: SimplifiedVh = Field(alias="vh_lines")
    vh_source: RecordSource
    label: Optional[str] = None
    luma: Optional[InstanceOf[LumaPlane]] = Field(default=None, exclude=True)

    def to_document(self) -> dict:
        return self.model_dump(mode="json", by_alias=True)


class ExplorationStep(BaseModel):
    """Шаг: экран до, действие, экран после."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    pre: ScreenRecord
    action: Action
    action_source: RecordSource
    post: ScreenRecord

    @model_validator(mode="after")
    def _check_order(self) -> "ExplorationStep":
        if self.pre.keyframe_index >= self.post.keyframe_index:
            raise ValueError(
                f"pre keyframe {self.pre.keyframe_index} must precede post {self.post.keyframe_index}"
            )
        return self

    def to_document(self) -> dict:
        return {
            "pre": self.pre.to_document(),
            "action": self.action.model_dump(mode="json"),
            "action_source": self.action_source.value,
            "post": self.post.to_document(),
        }


class ExplorationSequence(BaseModel):
    """Текстовая последовательность исследования одной записи."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    source_id: str
    steps: List[ExplorationStep] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_chain(self) -> "ExplorationSequence":
        for prev, nxt in zip(self.steps, self.steps[1:]):
            if prev.post.keyframe_index > nxt.pre.keyframe_index:
                raise ValueError(
                    f"step post {prev.post.keyframe_index} overlaps next pre {nxt.pre.keyframe_index}"
                )
        return self

    def to_document(self) -> dict:
        return {
            "source_id": self.source_id,
            "steps": [step.to_document() for step in self.steps],
        }


# ============================================================================
# ТРАССА
# ============================================================================

class TraceEvent(BaseModel):
    """Событие трассы: кадр начала действия, действие и (опционально) VH до/после."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    frame: int = Field(ge=0)
    action: Action
    pre_vh: Optional[ViewHierarchy] = None
    post_vh: Optional[ViewHierarchy] = None
    pre_screen: Optional[str] = None
    post_screen: Optional[str] = None

    def to_document(self) -> dict:
        return self.model_dump(mode="json", by_alias=True)


class TraceAlignment(BaseModel):
    """Результат сопоставления сегментов и событий трассы."""

    matches: dict[int, int] = Field(default_factory=dict)  # сегмент -> событие
    unmatched_events: List[int] = Field(default_factory=list)
    surplus_events: List[int] = Field(default_factory=list)
    unmatched_segments: List[int] = Field(default_factory=list)

    @property
    def dropped_events(self) -> List[int]:
        return sorted(self.unmatched_events + self.surplus_events)
