"""
Кастомные исключения для GUI Xplore Toolkit.

Иерархия: XploreException -> ошибка модуля -> конкретная ошибка операции.
Маркеры ValidationFailure / BackendFailure определяют код выхода CLI
(1 - ошибка валидации входных данных, 2 - отказ бэкенда модели).
"""
from typing import Any, Optional, Sequence


class XploreException(Exception):
    """Базовое исключение для всех ошибок приложения."""
    pass


class ValidationFailure:
    """Маркер: ошибка во входных данных (код выхода 1)."""
    exit_code = 1


class BackendFailure:
    """Маркер: отказ inference-бэкенда (код выхода 2)."""
    exit_code = 2


# ============================================================================
# INGEST
# ============================================================================

class IngestError(XploreException, ValidationFailure):
    """Ошибки загрузки кадров и манифеста."""
    pass


class MissingFile(IngestError):
    """Файл не найден."""
    def __init__(self, path: Any):
        self.path = str(path)
        super().__init__(f"Файл не найден: {self.path}")


class MalformedManifest(IngestError):
    """Манифест не читается или содержит некорректные поля."""
    def __init__(self, path: Any, reason: str):
        self.path = str(path)
        self.reason = reason
        super().__init__(f"Некорректный манифест {self.path}: {reason}")


class DimensionMismatch(IngestError):
    """Размер кадра не совпадает с ожидаемым."""
    def __init__(self, expected: tuple[int, int], actual: tuple[int, int], where: str = ""):
        self.expected = expected
        self.actual = actual
        self.where = where
        suffix = f" ({where})" if where else ""
        super().__init__(
            f"Размер {actual[0]}x{actual[1]} не совпадает с ожидаемым "
            f"{expected[0]}x{expected[1]}{suffix}"
        )


class EmptyFrame(IngestError):
    """Кадр без пикселей."""
    def __init__(self) -> None:
        super().__init__("Кадр не содержит ни одного пикселя")


# ============================================================================
# KEYFRAME
# ============================================================================

class KeyframeError(XploreException, ValidationFailure):
    """Ошибки выделения ключевых кадров."""
    pass


class TooFewFrames(KeyframeError):
    """Для Y-Diff нужно минимум два кадра."""
    def __init__(self, count: int):
        self.count = count
        super().__init__(f"Нужно минимум 2 кадра, получено {count}")


class IndexOutOfRange(KeyframeError):
    """Индекс кадра вне последовательности."""
    def __init__(self, index: int, frame_count: int):
        self.index = index
        self.frame_count = frame_count
        super().__init__(f"Индекс кадра {index} вне диапазона [0, {frame_count})")


# ============================================================================
# VIEW HIERARCHY
# ============================================================================

class VhError(XploreException, ValidationFailure):
    """Ошибки разбора иерархии представлений."""
    pass


class MalformedVh(VhError):
    """Документ VH синтаксически некорректен."""
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(f"Некорректный VH-документ: {reason}")


class SchemaViolation(VhError):
    """Документ VH нарушает схему (например, перевернутые bounds)."""
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(f"Нарушение схемы VH: {reason}")


# ============================================================================
# MODEL CLIENT
# ============================================================================

class ModelClientError(XploreException, BackendFailure):
    """Ошибки обращения к inference-бэкенду."""
    pass


class NoBackend(ModelClientError):
    """Бэкенд не настроен, а в кэше ответа нет."""
    def __init__(self, endpoint: str, request_id: str):
        self.endpoint = endpoint
        self.request_id = request_id
        super().__init__(
            f"Нет бэкенда для {endpoint} (request_id={request_id[:12]}) и нет ответа в кэше"
        )


class BackendTimeout(ModelClientError):
    """Бэкенд не ответил за отведенное время."""
    def __init__(self, endpoint: str, timeout: float):
        self.endpoint = endpoint
        self.timeout = timeout
        super().__init__(f"Таймаут {timeout:.1f}s при запросе {endpoint}")


class BackendMalformedReply(ModelClientError):
    """Ответ бэкенда не прошел валидацию схемы."""
    def __init__(self, endpoint: str, reason: str):
        self.endpoint = endpoint
        self.reason = reason
        super().__init__(f"Некорректный ответ бэкенда для {endpoint}: {reason}")


class BackendUnavailable(ModelClientError):
    """Сетевая ошибка при обращении к удаленному бэкенду."""
    def __init__(self, url: str, reason: str):
        self.url = url
        self.reason = reason
        super().__init__(f"Бэкенд {url} недоступен: {reason}")


class ClientUnavailable(ModelClientError):
    """Операция требовала модель, но клиент не смог ответить."""
    def __init__(self, operation: str, cause: Optional[BaseException] = None):
        self.operation = operation
        self.cause = cause
        detail = f": {cause}" if cause else ""
        super().__init__(f"Клиент модели недоступен для операции {operation}{detail}")


# ============================================================================
# SEQUENCE
# ============================================================================

class SequenceError(XploreException, ValidationFailure):
    """Ошибки сборки последовательности исследования."""
    pass


class TraceMisaligned(SequenceError):
    """Трасса не согласована с сегментами (нет события для сегмента)."""
    def __init__(self, segment_indices: Sequence[int]):
        self.segment_indices = list(segment_indices)
        super().__init__(f"Нет события трассы для сегментов: {self.segment_indices}")


class MalformedTrace(SequenceError):
    """Строка trace.jsonl некорректна."""
    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"Некорректное событие трассы в строке {line_no}: {reason}")


# ============================================================================
# CLUSTER
# ============================================================================

class ClusterError(XploreException, ValidationFailure):
    """Ошибки кластеризации экранов."""
    pass


class UniverseMismatch(ClusterError):
    """Разбиения определены на разных множествах ключевых кадров."""
    def __init__(self, only_pred: Sequence[int], only_gt: Sequence[int]):
        self.only_pred = sorted(only_pred)
        self.only_gt = sorted(only_gt)
        super().__init__(
            f"Разные множества кадров: только в pred={self.only_pred[:10]}, "
            f"только в gt={self.only_gt[:10]}"
        )


# ============================================================================
# GRAPH
# ============================================================================

class GraphError(XploreException, ValidationFailure):
    """Ошибки построения графа переходов и запросов к нему."""
    pass


class UnassignedKeyframe(GraphError):
    """Ключевой кадр шага не отнесен ни к одному узлу."""
    def __init__(self, keyframe_index: int):
        self.keyframe_index = keyframe_index
        super().__init__(f"Ключевой кадр {keyframe_index} не назначен ни одному узлу")


class EdgeNotInGraph(GraphError):
    """Ребро отсутствует в графе."""
    def __init__(self, edge: Any):
        self.edge = edge
        super().__init__(f"Ребро не найдено в графе: {edge}")


class UnknownNode(GraphError):
    """Узел отсутствует в графе."""
    def __init__(self, node_id: int):
        self.node_id = node_id
        super().__init__(f"Узел {node_id} не найден в графе")


class Unreachable(GraphError):
    """Целевой узел недостижим из домашнего."""
    def __init__(self, home: int, target: int):
        self.home = home
        self.target = target
        super().__init__(f"Узел {target} недостижим из домашнего узла {home}")


class BudgetTooSmallForNodes(GraphError):
    """Бюджет контекста меньше размера списка узлов."""
    def __init__(self, budget: int, required: int):
        self.budget = budget
        self.required = required
        super().__init__(f"Бюджет {budget} меньше размера списка узлов ({required} токенов)")


# ============================================================================
# TASKS
# ============================================================================

class TaskError(XploreException, ValidationFailure):
    """Ошибки QA-задач и метрик."""
    pass


class MalformedQa(TaskError):
    """Строка QA-файла некорректна."""
    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"Некорректный QA-элемент в строке {line_no}: {reason}")


class BadOptionCount(TaskError):
    """Количество вариантов ответа не равно пяти."""
    def __init__(self, line_no: int, count: int):
        self.line_no = line_no
        self.count = count
        super().__init__(f"Строка {line_no}: ожидалось 5 вариантов, получено {count}")


class BadGtIndex(TaskError):
    """Индекс правильного ответа вне [0, 4]."""
    def __init__(self, line_no: int, gt_index: Any):
        self.line_no = line_no
        self.gt_index = gt_index
        super().__init__(f"Строка {line_no}: индекс ответа {gt_index} вне [0, 4]")


class InsufficientMaterial(TaskError):
    """В графе недостаточно материала для генерации вопросов."""
    def __init__(self, task: str, reason: str):
        self.task = task
        self.reason = reason
        super().__init__(f"Недостаточно материала для задачи {task}: {reason}")


# ============================================================================
# SIMULATION
# ============================================================================

class SimulationError(XploreException, ValidationFailure):
    """Ошибки синтетической модели приложения."""
    pass


class InvalidAppModel(SimulationError):
    """Модель приложения нарушает инварианты."""
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(f"Некорректная модель приложения: {reason}")


# ============================================================================
# PIPELINE
# ============================================================================

class PipelineError(XploreException, ValidationFailure):
    """Ошибки оркестрации пайплайна."""
    pass


class StageFailed(PipelineError):
    """Стадия пайплайна завершилась ошибкой."""
    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, 'exit_code', 1)
        super().__init__(f"Стадия '{stage}' завершилась ошибкой: {cause}")


class InvalidConfig(PipelineError):
    """Файл конфигурации пайплайна не читается или нарушает схему."""
    def __init__(self, path: Any, reason: str):
        self.path = str(path)
        self.reason = reason
        super().__init__(f"Некорректная конфигурация {self.path}: {reason}")
