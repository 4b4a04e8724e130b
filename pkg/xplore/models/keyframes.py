"""
Модели выделения ключевых кадров: ряд Y-Diff, конфигурация сегментатора,
сегменты действий и отчет сравнения с выборкой по фиксированному интервалу.
"""
from typing import List, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


class SegmenterConfig(BaseModel):
    """
    Пороги гистерезисного сегментатора.

    theta_high - порог начала всплеска, theta_low - порог "успокоения",
    min_static - сколько тихих значений подряд отделяют всплески.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    theta_high: float = Field(default=0.01, ge=0.0, le=1.0)
    theta_low: float = Field(default=0.003, ge=0.0, le=1.0)
    min_static: int = Field(default=2, ge=1)

    @model_validator(mode="after")
    def _check_order(self) -> "SegmenterConfig":
        if self.theta_low > self.theta_high:
            raise ValueError(
                f"theta_low ({self.theta_low}) must not exceed theta_high ({self.theta_high})"
            )
        return self


class YDiffSeries(BaseModel):
    """values[i] - нормированная разность яркости кадров i и i+1."""

    model_config = ConfigDict(frozen=True)

    values: Tuple[float, ...]

    @model_validator(mode="after")
    def _check_range(self) -> "YDiffSeries":
        for i, value in enumerate(self.values):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"values[{i}]={value} outside [0, 1]")
        return self

    @property
    def frame_count(self) -> int:
        return len(self.values) + 1

    def __len__(self) -> int:
        return len(self.values)


class ActionSegment(BaseModel):
    """
    Одно действие в записи.

    change_start/change_end - индексы ряда Y-Diff активного всплеска;
    pre/post - статичные кадры до и после действия.
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    pre_keyframe: int = Field(alias="pre", ge=0)
    change_start: int = Field(ge=0)
    change_end: int = Field(ge=0)
    post_keyframe: int = Field(alias="post", ge=1)

    @model_validator(mode="after")
    def _check_bounds(self) -> "ActionSegment":
        # всплеск с самого начала записи не имеет статичного кадра перед собой
        degenerate_start = self.pre_keyframe == 0 and self.change_start == 0
        if not (self.pre_keyframe < self.change_start or degenerate_start):
            raise ValueError(f"pre_keyframe {self.pre_keyframe} >= change_start {self.change_start}")
        if self.change_start > self.change_end:
            raise ValueError(f"change_start {self.change_start} > change_end {self.change_end}")
        if self.change_end >= self.post_keyframe:
            raise ValueError(f"change_end {self.change_end} >= post_keyframe {self.post_keyframe}")
        return self

    def to_document(self) -> dict:
        return {
            "pre": self.pre_keyframe,
            "change_start": self.change_start,
            "change_end": self.change_end,
            "post": self.post_keyframe,
        }


class KeyframeResult(BaseModel):
    """Содержимое keyframes.json."""

    model_config = ConfigDict(frozen=True)

    source_id: str
    config: SegmenterConfig
    segments: List[ActionSegment]
    keyframes: List[int]

    def to_document(self) -> dict:
        return {
            "source_id": self.source_id,
            "config": self.config.model_dump(),
            "segments": [segment.to_document() for segment in self.segments],
            "keyframes": list(self.keyframes),
        }


class KeyframeReduction(BaseModel):
    """Сравнение выборки 1 кадр/интервал с выделением по действиям."""

    fixed_count: int
    action_count: int
    ratio: float
    fixed_pages_per_100: float
    action_pages_per_100: float
    segments: int = 0
