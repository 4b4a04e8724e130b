"""
Модели downstream-задач: вопросы с пятью вариантами, предсказания,
шаги автоматизации и метрики.
"""
import enum
from typing import Any, Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from xplore.models.sequence import ActionKind, ElementRef

OPTION_COUNT = 5
OPTION_LETTERS = "ABCDE"


# ============================================================================
# ENUM ТИПЫ
# ============================================================================

class TaskKind(str, enum.Enum):
    """Тип downstream-задачи"""
    overview = "overview"  # Обзор приложения
    page_analysis = "page_analysis"  # Назначение экрана
    usage = "usage"  # Путь от главного экрана к цели
    action_recall = "action_recall"  # Какое действие было на шаге k
    seq_verify = "seq_verify"  # Правильный порядок операций


# ============================================================================
# QA
# ============================================================================

class QaItem(BaseModel):
    """Вопрос с пятью различными вариантами; gt_index в [0, 4]."""

    model_config = ConfigDict(frozen=True, populate_by_name=True, extra="forbid")

    task: TaskKind
    question: str = Field(min_length=1)
    options: Tuple[str, ...]
    gt_index: int = Field(alias="gt", ge=0, le=OPTION_COUNT - 1)
    source_id: str
    meta: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("options")
    @classmethod
    def _check_options(cls, value: Tuple[str, ...]) -> Tuple[str, ...]:
        if len(value) != OPTION_COUNT:
            raise ValueError(f"expected {OPTION_COUNT} options, got {len(value)}")
        if len(set(value)) != len(value):
            raise ValueError("options must be distinct")
        return value

    @property
    def gt_letter(self) -> str:
        return OPTION_LETTERS[self.gt_index]

    def to_document(self) -> dict:
        return self.model_dump(mode="json", by_alias=True)


class PredictionRecord(BaseModel):
    """Ответ на вопрос; chosen_index=None - воздержание (считается ошибкой)."""

    model_config = ConfigDict(frozen=True)

    item: QaItem
    chosen_index: Optional[int] = Field(default=None, ge=0, le=OPTION_COUNT - 1)
    raw_reply: str = ""

    @property
    def abstained(self) -> bool:
        return self.chosen_index is None

    @property
    def correct(self) -> bool:
        return self.chosen_index is not None and self.chosen_index == self.item.gt_index

    def to_document(self) -> dict:
        document = self.item.to_document()
        document["chosen"] = self.chosen_index
        document["raw_reply"] = self.raw_reply
        return document


# ============================================================================
# АВТОМАТИЗАЦИЯ
# ============================================================================

class AutomationStep(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    gt_element: ElementRef
    gt_operation: ActionKind
    gt_params: Optional[str] = None
    pred_element: Optional[ElementRef] = None
    pred_operation: Optional[ActionKind] = None
    pred_params: Optional[str] = None


class AutomationMetrics(BaseModel):
    ele_acc: float
    op_acc: float
    step_sr: float
    total: int


# ============================================================================
# МЕТРИКИ
# ============================================================================

class TaskScore(BaseModel):
    correct: int = 0
    abstained: int = 0
    total: int = 0

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0


class TaskMetrics(BaseModel):
    """Точность по задачам и макро-среднее по присутствующим задачам."""

    per_task: Dict[TaskKind, TaskScore] = Field(default_factory=dict)

    @property
    def macro(self) -> float:
        if not self.per_task:
            return 0.0
        return sum(score.accuracy for score in self.per_task.values()) / len(self.per_task)

    @property
    def total(self) -> int:
        return sum(score.total for score in self.per_task.values())

    @property
    def correct(self) -> int:
        return sum(score.correct for score in self.per_task.values())

    def accuracy(self, task: TaskKind) -> float:
        return self.per_task[task].accuracy

    def to_document(self) -> dict:
        return {
            "tasks": {
                task.value: {
                    "accuracy": score.accuracy,
                    "correct": score.correct,
                    "abstained": score.abstained,
                    "total": score.total,
                }
                for task, score in sorted(self.per_task.items(), key=lambda kv: kv[0].value)
            },
            "macro": self.macro,
            "correct": self.correct,
            "total": self.total,
        }
