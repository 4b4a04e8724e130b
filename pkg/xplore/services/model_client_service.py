"""
Клиент inference-бэкенда.

Единый интерфейс к четырем точкам входа (vh_generate, action_generate,
cluster_decide, qa_answer) с тремя источниками ответа:
- MockBackend - детерминированная функция payload с таблицей фикстур
- RemoteBackend - POST {url}/v1/infer через aiohttp
- кэш ответов: <cache_dir>/<endpoint>/<request_id>.json (атомарная запись)

Без бэкенда (режим replay) клиент отвечает только из кэша.
"""
import asyncio
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Protocol, Sequence

import aiohttp
from pydantic import ValidationError

from xplore.config import settings
from xplore.exceptions import (
    BackendMalformedReply,
    BackendTimeout,
    BackendUnavailable,
    NoBackend,
)
from xplore.models.inference import (
    PAYLOAD_SCHEMAS,
    REPLY_SCHEMAS,
    BackendChoice,
    BackendKind,
    Endpoint,
    EndpointUsage,
    InferenceRequest,
    InferenceResponse,
)
from xplore.utils.helpers import atomic_write_text, canonical_json, dump_json, read_json, sha256_hex, word_count
from xplore.utils.logger import get_logger

logger = get_logger("model_client_service")


# ============================================================================
# ЗАПРОСЫ
# ============================================================================

def request_id_for(endpoint: Endpoint, payload: Mapping[str, Any]) -> str:
    """sha256 канонического JSON {"endpoint", "payload"}; стабилен между процессами."""
    return sha256_hex(canonical_json({"endpoint": Endpoint(endpoint).value, "payload": payload}))


def build_request(endpoint: Endpoint, payload: Mapping[str, Any]) -> InferenceRequest:
    """
    Проверить payload по схеме точки входа и построить запрос.

    Payload нормализуется (None-поля удаляются), request_id считается
    от нормализованной формы.

    Raises:
        ValueError: payload не соответствует схеме
    """
    endpoint = Endpoint(endpoint)
    try:
        normalized = PAYLOAD_SCHEMAS[endpoint].model_validate(dict(payload)).model_dump(
            mode="json", exclude_none=True
        )
    except ValidationError as e:
        raise ValueError(f"Некорректный payload для {endpoint.value}: {e}") from e
    return InferenceRequest(
        endpoint=endpoint,
        payload=normalized,
        request_id=request_id_for(endpoint, normalized),
    )


def validate_reply(endpoint: Endpoint, body: Any) -> Dict[str, Any]:
    """
    Проверить тело ответа по схеме точки входа.

    Raises:
        BackendMalformedReply: тело не проходит схему
    """
    if not isinstance(body, dict):
        raise BackendMalformedReply(endpoint.value, f"тело ответа не объект: {type(body).__name__}")
    try:
        REPLY_SCHEMAS[endpoint].model_validate(body)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(p) for p in first["loc"]) or "body"
        raise BackendMalformedReply(endpoint.value, f"{location}: {first['msg']}")
    return body


# ============================================================================
# БЭКЕНДЫ
# ============================================================================

class Backend(Protocol):
    kind: BackendKind

    @property
    def identity(self) -> str: ...

    async def infer(self, request: InferenceRequest) -> Any: ...

    async def close(self) -> None: ...


@dataclass(frozen=True)
class MockPattern:
    """Шаблон фикстуры: endpoint + подмножество payload -> тело ответа."""

    endpoint: Endpoint
    match: Mapping[str, Any]
    body: Mapping[str, Any]


def _is_subset(pattern: Any, value: Any) -> bool:
    if isinstance(pattern, Mapping):
        return isinstance(value, Mapping) and all(
            key in value and _is_subset(sub, value[key]) for key, sub in pattern.items()
        )
    return pattern == value


def default_reply(endpoint: Endpoint, payload: Mapping[str, Any]) -> Dict[str, Any]:
    """
    Ответ mock-бэкенда без подходящей фикстуры.

    - vh_generate: одна строка с отпечатком скриншота (одинаковые кадры
      получают одинаковую VH)
    - action_generate: swipe без цели
    - cluster_decide: если передан hidden_label - match узла с таким
      описанием, иначе new(hidden_label); без метки - всегда new
    - qa_answer: "A" (вариант 0)
    """
    if endpoint == Endpoint.vh_generate:
        digest = payload["screenshot"]["luma_digest"]
        return {"lines": [f"0|GeneratedScreen|screen_{digest[:12]}||false"]}
    if endpoint == Endpoint.action_generate:
        return {"action": {"kind": "swipe", "target": None, "params": None}}
    if endpoint == Endpoint.cluster_decide:
        nodes = payload.get("nodes", [])
        label = payload.get("hidden_label")
        if label is not None:
            for node in nodes:
                if node["description"] == label:
                    return {"match": node["id"]}
            return {"new": label}
        return {"new": f"Screen {len(nodes)}"}
    return {"reply": "A"}


class MockBackend:
    """
    Детерминированный бэкенд: фикстуры по request_id, затем шаблоны
    по порядку, затем default_reply.
    """

    kind = BackendKind.mock

    def __init__(
        self,
        fixtures: Optional[Mapping[str, Mapping[str, Any]]] = None,
        patterns: Sequence[MockPattern] = (),
    ):
        self.fixtures = dict(fixtures or {})
        self.patterns = list(patterns)
        self.calls = 0

    @property
    def identity(self) -> str:
        return self.kind.value

    async def infer(self, request: InferenceRequest) -> Any:
        self.calls += 1
        if request.request_id in self.fixtures:
            return dict(self.fixtures[request.request_id])
        for pattern in self.patterns:
            if pattern.endpoint == request.endpoint and _is_subset(pattern.match, request.payload):
                return dict(pattern.body)
        return default_reply(request.endpoint, request.payload)

    async def close(self) -> None:
        return None


def mock_backend(
    fixtures: Optional[Mapping[str, Mapping[str, Any]]] = None,
    patterns: Sequence[MockPattern] = (),
) -> MockBackend:
    """Создать mock-бэкенд с таблицей фикстур."""
    return MockBackend(fixtures=fixtures, patterns=patterns)


class RemoteBackend:
    """
    HTTP-бэкенд: POST {url}/v1/infer, тело {"endpoint", "payload"},
    ответ {"body": {...}}. Число одновременных запросов ограничено.
    """

    kind = BackendKind.remote

    def __init__(self, url: str, timeout: Optional[float] = None, max_in_flight: Optional[int] = None):
        self.url = url.rstrip("/")
        self.timeout = timeout or settings.MODEL_TIMEOUT
        self._semaphore = asyncio.Semaphore(max_in_flight or settings.MODEL_MAX_IN_FLIGHT)
        self._session: Optional[aiohttp.ClientSession] = None

    @property
    def identity(self) -> str:
        return f"{self.kind.value}:{self.url}"

    async def _get_session(self) -> aiohttp.ClientSession:
        if self._session is None or self._session.closed:
            self._session = aiohttp.ClientSession(timeout=aiohttp.ClientTimeout(total=self.timeout))
        return self._session

    async def infer(self, request: InferenceRequest) -> Any:
        endpoint = request.endpoint.value
        async with self._semaphore:
            session = await self._get_session()
            try:
                async with session.post(
                    f"{self.url}/v1/infer",
                    json={"endpoint": endpoint, "payload": request.payload},
                ) as response:
                    if response.status != 200:
                        raise BackendUnavailable(self.url, f"HTTP {response.status}")
                    data = await response.json(content_type=None)
            except asyncio.TimeoutError:
                raise BackendTimeout(endpoint, self.timeout)
            except ValueError as e:
                raise BackendMalformedReply(endpoint, f"ответ не JSON: {e}")
            except aiohttp.ClientError as e:
                raise BackendUnavailable(self.url, str(e))

        if not isinstance(data, dict) or "body" not in data:
            raise BackendMalformedReply(endpoint, "в ответе нет поля body")
        return data["body"]

    async def close(self) -> None:
        if self._session is not None and not self._session.closed:
            await self._session.close()


# ============================================================================
# КЛИЕНТ
# ============================================================================

@dataclass
class ModelClient:
    """
    Клиент с кэшем ответов и учетом токенов.

    backend=None - режим replay: промах кэша дает NoBackend.
    cache_dir=None - кэш только в памяти.
    """

    backend: Optional[Backend] = None
    cache_dir: Optional[Path] = None
    usage: Dict[Endpoint, EndpointUsage] = field(default_factory=dict)
    _memory: Dict[str, Dict[str, Any]] = field(default_factory=dict, repr=False)

    @property
    def backend_name(self) -> str:
        return self.backend.kind.value if self.backend is not None else "replay"

    @property
    def backend_identity(self) -> Optional[str]:
        """Источник ответов для хэшей стадий (mock, remote:<url>); None - replay."""
        return self.backend.identity if self.backend is not None else None

    def _cache_path(self, request: InferenceRequest) -> Optional[Path]:
        if self.cache_dir is None:
            return None
        return Path(self.cache_dir) / request.endpoint.value / f"{request.request_id}.json"

    def _cache_get(self, request: InferenceRequest) -> Optional[Dict[str, Any]]:
        if request.request_id in self._memory:
            return self._memory[request.request_id]
        path = self._cache_path(request)
        if path is None or not path.is_file():
            return None
        try:
            body = read_json(path)
        except ValueError as e:
            logger.warning(f"⚠️ Поврежденная запись кэша {path.name}: {e}")
            return None
        self._memory[request.request_id] = body
        return body

    def _cache_put(self, request: InferenceRequest, body: Dict[str, Any]) -> None:
        self._memory[request.request_id] = body
        path = self._cache_path(request)
        if path is not None:
            atomic_write_text(path, dump_json(body))

    def _account(self, request: InferenceRequest, body: Dict[str, Any], cached: bool) -> None:
        usage = self.usage.setdefault(request.endpoint, EndpointUsage())
        usage.calls += 1
        usage.cache_hits += int(cached)
        usage.payload_tokens += word_count(request.payload)
        usage.reply_tokens += word_count(body)

    async def invoke(self, request: InferenceRequest) -> InferenceResponse:
        """
        Выполнить запрос: кэш, затем бэкенд; ответ бэкенда кэшируется.

        Raises:
            NoBackend: бэкенд не настроен и ответа нет в кэше
            BackendTimeout, BackendUnavailable: отказ удаленного бэкенда
            BackendMalformedReply: ответ не проходит схему
        """
        cached = self._cache_get(request)
        if cached is not None:
            body = validate_reply(request.endpoint, cached)
            self._account(request, body, cached=True)
            logger.debug(f"💾 Кэш {request.endpoint.value} {request.request_id[:12]}")
            return InferenceResponse(request_id=request.request_id, body=body, backend=BackendKind.cache)

        if self.backend is None:
            raise NoBackend(request.endpoint.value, request.request_id)

        body = validate_reply(request.endpoint, await self.backend.infer(request))
        self._cache_put(request, body)
        self._account(request, body, cached=False)
        logger.debug(f"🤖 {self.backend.kind.value} {request.endpoint.value} {request.request_id[:12]}")
        return InferenceResponse(request_id=request.request_id, body=body, backend=self.backend.kind)

    async def call(self, endpoint: Endpoint, payload: Mapping[str, Any]) -> InferenceResponse:
        """build_request + invoke."""
        return await self.invoke(build_request(endpoint, payload))

    def token_totals(self) -> Dict[str, EndpointUsage]:
        return {endpoint.value: usage.model_copy() for endpoint, usage in sorted(
            self.usage.items(), key=lambda kv: kv[0].value
        )}

    async def close(self) -> None:
        if self.backend is not None:
            await self.backend.close()

    async def __aenter__(self) -> "ModelClient":
        return self

    async def __aexit__(self, *exc: Any) -> None:
        await self.close()


def create_client(
    choice: BackendChoice = BackendChoice.auto,
    cache_dir: Optional[Path] = None,
    disk_cache: bool = True,
    model_url: Optional[str] = None,
) -> ModelClient:
    """
    Создать клиент по выбору бэкенда.

    auto - remote, если задан XPLORE_MODEL_URL, иначе mock; replay - только кэш.

    Raises:
        BackendUnavailable: выбран remote без URL
    """
    choice = BackendChoice(choice)
    url = model_url or settings.XPLORE_MODEL_URL
    directory = (Path(cache_dir) if cache_dir else settings.cache_dir()) if disk_cache else None

    backend: Optional[Backend]
    if choice == BackendChoice.remote or (choice == BackendChoice.auto and url):
        if not url:
            raise BackendUnavailable("<не задан>", "XPLORE_MODEL_URL не задан для remote-бэкенда")
        backend = RemoteBackend(url)
    elif choice == BackendChoice.replay:
        backend = None
    else:
        backend = MockBackend()

    name = backend.kind.value if backend is not None else "replay"
    logger.info(f"🔌 Бэкенд модели: {name}, кэш: {directory or 'в памяти'}")
    return ModelClient(backend=backend, cache_dir=directory)
