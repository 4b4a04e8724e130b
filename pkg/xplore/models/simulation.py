"""
Модели синтетического приложения, политики исследования и рендеринга.
"""
import enum
from dataclasses import dataclass
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from xplore.models.frames import FrameManifest, FrameSequence
from xplore.models.sequence import Action, TraceEvent
from xplore.models.vh import Bounds, ViewHierarchy

# Минимальный static_run: min_static сегментатора по умолчанию + 1
MIN_STATIC_RUN = 3


class PolicyKind(str, enum.Enum):
    """Политика исследования"""
    dfs = "dfs"  # Систематический обход в глубину
    random = "random"  # Случайные клики с seed


# ============================================================================
# МОДЕЛЬ ПРИЛОЖЕНИЯ
# ============================================================================

class AppElement(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    element_id: str = Field(min_length=1)
    bounds: Bounds
    clickable: bool = True
    text: Optional[str] = None


class AppScreen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    screen_id: str = Field(min_length=1)
    description: str
    elements: List[AppElement] = Field(default_factory=list)

    def element(self, element_id: str) -> AppElement:
        for element in self.elements:
            if element.element_id == element_id:
                return element
        raise KeyError(element_id)


class Transition(BaseModel):
    """Клик по element на screen ведет на target."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    screen: str
    element: str
    target: str


class AppModel(BaseModel):
    """Декларативная модель приложения (appmodel.json)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: Optional[str] = None
    description: Optional[str] = None
    screens: List[AppScreen] = Field(min_length=1)
    transitions: List[Transition] = Field(default_factory=list)
    home: str
    back_map: Dict[str, str] = Field(default_factory=dict)

    @property
    def screen_ids(self) -> List[str]:
        return [screen.screen_id for screen in self.screens]

    def screen(self, screen_id: str) -> AppScreen:
        for screen in self.screens:
            if screen.screen_id == screen_id:
                return screen
        raise KeyError(screen_id)

    def transition_map(self) -> Dict[tuple[str, str], str]:
        return {(t.screen, t.element): t.target for t in self.transitions}


# ============================================================================
# ИССЛЕДОВАНИЕ И РЕНДЕРИНГ
# ============================================================================

class ExplorationPolicy(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: PolicyKind = PolicyKind.dfs
    seed: int = 0
    max_steps: int = Field(default=200, ge=1)


class RenderConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    width: int = Field(default=144, ge=1)
    height: int = Field(default=256, ge=1)
    static_run: int = Field(default=4, ge=MIN_STATIC_RUN)
    transition_run: int = Field(default=3, ge=1)
    fps: float = Field(default=10.0, gt=0)


class ExplorationEvent(BaseModel):
    """Событие исследователя: экран до, действие, экран после и полные VH."""

    model_config = ConfigDict(frozen=True)

    pre_screen: str
    action: Action
    post_screen: str
    pre_vh: ViewHierarchy
    post_vh: ViewHierarchy


class SyntheticGroundTruth(BaseModel):
    """Модель приложения вместе с выполненными событиями."""

    model_config = ConfigDict(frozen=True)

    model: AppModel
    events: List[ExplorationEvent] = Field(default_factory=list)


@dataclass(frozen=True)
class RenderedCorpus:
    """Результат рендеринга: кадры, манифест и трасса с индексами кадров."""

    frames: FrameSequence
    trace: List[TraceEvent]

    @property
    def manifest(self) -> FrameManifest:
        return self.frames.manifest
