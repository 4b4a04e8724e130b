"""
Модели обращения к inference-бэкенду.

Для каждой точки входа описаны схема payload запроса и схема тела ответа;
клиент валидирует обе.
"""
import enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from xplore.exceptions import MalformedVh
from xplore.models.sequence import Action
from xplore.models.vh import SimplifiedVh


# ============================================================================
# ENUM ТИПЫ
# ============================================================================

class Endpoint(str, enum.Enum):
    """Точка входа inference"""
    vh_generate = "vh_generate"  # Генерация упрощенной VH по скриншоту
    action_generate = "action_generate"  # Генерация действия по соседним кадрам
    cluster_decide = "cluster_decide"  # Решение кластеризации
    qa_answer = "qa_answer"  # Ответ на вопрос


class BackendKind(str, enum.Enum):
    """Откуда получен ответ"""
    mock = "mock"
    cache = "cache"
    remote = "remote"


class BackendChoice(str, enum.Enum):
    """Выбор бэкенда в CLI и конфигурации пайплайна"""
    auto = "auto"  # remote, если задан XPLORE_MODEL_URL, иначе mock
    mock = "mock"
    remote = "remote"
    replay = "replay"  # только кэш


# ============================================================================
# ЗАПРОС / ОТВЕТ
# ============================================================================

class InferenceRequest(BaseModel):
    """Запрос к бэкенду; request_id - sha256 канонического {endpoint, payload}."""

    model_config = ConfigDict(frozen=True)

    endpoint: Endpoint
    payload: Dict[str, Any]
    request_id: str


class InferenceResponse(BaseModel):
    model_config = ConfigDict(frozen=True)

    request_id: str
    body: Dict[str, Any]
    backend: BackendKind


class EndpointUsage(BaseModel):
    """Счетчики вызовов и токенов по одной точке входа."""

    calls: int = 0
    cache_hits: int = 0
    payload_tokens: int = 0
    reply_tokens: int = 0

    @property
    def total_tokens(self) -> int:
        return self.payload_tokens + self.reply_tokens


# ============================================================================
# PAYLOAD СХЕМЫ
# ============================================================================

class _Payload(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ScreenshotRef(_Payload):
    width: int = Field(ge=1)
    height: int = Field(ge=1)
    luma_digest: str = Field(min_length=8)


class VhGeneratePayload(_Payload):
    screenshot: ScreenshotRef


class ActionScreen(_Payload):
    vh_lines: List[str]
    screenshot: Optional[ScreenshotRef] = None


class ActionGeneratePayload(_Payload):
    pre: ActionScreen
    post: ActionScreen


class NodeBrief(_Payload):
    id: int = Field(ge=0)
    description: str


class ClusterDecidePayload(_Payload):
    instruction: str
    vh_lines: List[str]
    nodes: List[NodeBrief]
    screenshot: Optional[ScreenshotRef] = None
    hidden_label: Optional[str] = None


class QaAnswerPayload(_Payload):
    prompt: str = Field(min_length=1)


# ============================================================================
# СХЕМЫ ОТВЕТОВ
# ============================================================================

class VhGenerateReply(BaseModel):
    """Строки упрощенной VH; формат и глубины проверяются при приеме ответа."""

    lines: List[str]

    @field_validator("lines")
    @classmethod
    def _check_lines(cls, lines: List[str]) -> List[str]:
        # сервисы импортируют модели, поэтому импорт здесь
        from xplore.services.vh_service import simplified_to_vh

        try:
            simplified_to_vh(SimplifiedVh(tuple(lines)))
        except MalformedVh as e:
            raise ValueError(e.reason)
        return lines


class ActionGenerateReply(BaseModel):
    action: Action


class ClusterDecideReply(BaseModel):
    """Ровно одно из match / new."""

    match: Optional[int] = None
    new: Optional[str] = None

    @model_validator(mode="after")
    def _exactly_one(self) -> "ClusterDecideReply":
        if (self.match is None) == (self.new is None):
            raise ValueError("reply must carry exactly one of 'match' or 'new'")
        return self


class QaAnswerReply(BaseModel):
    reply: str


PAYLOAD_SCHEMAS: Dict[Endpoint, type[BaseModel]] = {
    Endpoint.vh_generate: VhGeneratePayload,
    Endpoint.action_generate: ActionGeneratePayload,
    Endpoint.cluster_decide: ClusterDecidePayload,
    Endpoint.qa_answer: QaAnswerPayload,
}

REPLY_SCHEMAS: Dict[Endpoint, type[BaseModel]] = {
    Endpoint.vh_generate: VhGenerateReply,
    Endpoint.action_generate: ActionGenerateReply,
    Endpoint.cluster_decide: ClusterDecideReply,
    Endpoint.qa_answer: QaAnswerReply,
}
