"""
Сервис кластеризации экранов в узлы графа.

Оба алгоритма последовательные: экраны просматриваются в порядке
ключевых кадров, каждый либо присоединяется к существующему узлу,
либо создает новый.
- rule: сходство VH и скриншота с представителем узла (первым членом)
- model: решение cluster_decide по упрощенной VH и списку узлов
- none: каждый кадр - отдельный узел (база для сравнения)
"""
from pathlib import Path
from typing import Dict, Hashable, List, Mapping, Optional, Sequence

from xplore.exceptions import ClientUnavailable, ClusterError, ModelClientError, UniverseMismatch
from xplore.models.clusters import (
    AssignmentQuality,
    ClusterAssignment,
    ClusterMethod,
    RuleClusterConfig,
    ScreenNode,
)
from xplore.models.inference import ClusterDecideReply, Endpoint
from xplore.models.sequence import ScreenRecord
from xplore.prompts import load_templates
from xplore.services.ingest_service import luma_digest
from xplore.services.model_client_service import ModelClient
from xplore.services.vh_service import clickable_texts, screenshot_similarity, simplified_similarity
from xplore.utils.calculations import rand_index, same_partition
from xplore.utils.helpers import read_json, write_json
from xplore.utils.logger import get_logger

logger = get_logger("cluster_service")

DESCRIPTION_TEXTS = 3


class _NodeBuilder:
    """Накопитель узлов: id по порядку создания, члены по порядку."""

    def __init__(self) -> None:
        self.descriptions: List[str] = []
        self.members: List[List[int]] = []
        self.assignment: Dict[int, int] = {}

    def new(self, keyframe: int, description: str) -> int:
        node_id = len(self.members)
        self.descriptions.append(description)
        self.members.append([keyframe])
        self.assignment[keyframe] = node_id
        return node_id

    def join(self, node_id: int, keyframe: int) -> None:
        self.members[node_id].append(keyframe)
        self.assignment[keyframe] = node_id

    def build(self, method: ClusterMethod) -> ClusterAssignment:
        nodes = [
            ScreenNode(node_id=i, description=desc, representative=members[0], members=members)
            for i, (desc, members) in enumerate(zip(self.descriptions, self.members))
        ]
        return ClusterAssignment(method=method, nodes=nodes, assignment=dict(self.assignment))


def describe_screen(screen: ScreenRecord, node_id: int) -> str:
    """Описание узла из VH: первые кликабельные тексты или "Screen N"."""
    texts = clickable_texts(screen.vh)[:DESCRIPTION_TEXTS]
    return ", ".join(texts) if texts else f"Screen {node_id}"


def _check_unique(screens: Sequence[ScreenRecord]) -> None:
    seen = set()
    for screen in screens:
        if screen.keyframe_index in seen:
            raise ClusterError(f"Ключевой кадр {screen.keyframe_index} передан дважды")
        seen.add(screen.keyframe_index)


# ============================================================================
# ПРАВИЛОВАЯ КЛАСТЕРИЗАЦИЯ
# ============================================================================

def cluster_rule(screens: Sequence[ScreenRecord], cfg: Optional[RuleClusterConfig] = None) -> ClusterAssignment:
    """
    Экран присоединяется к узлу с наименьшим id, у представителя которого
    сходство VH >= tau_vh и screenshot_similarity >= tau_img; иначе
    создается новый узел.

    Сходство VH считается по упрощенным строкам (simplified_similarity):
    экраны последовательности хранят только SimplifiedVh, полное дерево
    для сгенерированных VH не существует. От vh_similarity по полному дереву
    значение может отличаться: simplify отбрасывает пустые контейнеры.

    Raises:
        ClusterError: у экрана нет плоскости яркости
    """
    cfg = cfg or RuleClusterConfig()
    _check_unique(screens)
    builder = _NodeBuilder()
    representatives: List[ScreenRecord] = []

    for screen in screens:
        if screen.luma is None:
            raise ClusterError(f"Для кадра {screen.keyframe_index} нет скриншота (luma)")
        joined = False
        for node_id, rep in enumerate(representatives):
            if simplified_similarity(screen.vh, rep.vh) < cfg.tau_vh:
                continue
            if screenshot_similarity(screen.luma, rep.luma) < cfg.tau_img:
                continue
            builder.join(node_id, screen.keyframe_index)
            joined = True
            break
        if not joined:
            builder.new(screen.keyframe_index, describe_screen(screen, len(representatives)))
            representatives.append(screen)

    result = builder.build(ClusterMethod.rule)
    logger.info(f"🗂 Правиловая кластеризация: {len(screens)} экранов -> {len(result.nodes)} узлов")
    return result


# ============================================================================
# КЛАСТЕРИЗАЦИЯ МОДЕЛЬЮ
# ============================================================================

async def cluster_model(
    screens: Sequence[ScreenRecord],
    client: ModelClient,
    oracle_labels: bool = False,
) -> ClusterAssignment:
    """
    Последовательная кластеризация решениями модели.

    На каждый экран - один запрос cluster_decide с упрощенной VH и текущим
    списком узлов (id + описание). Ответ {match: id} присоединяет экран,
    {new: описание} создает узел. Несуществующий id в ответе - новый узел
    с автоописанием (с предупреждением в логе).

    Args:
        screens: экраны в порядке ключевых кадров
        client: клиент модели
        oracle_labels: передавать скрытую метку экрана (hidden_label)

    Raises:
        ClientUnavailable: клиент не смог ответить
    """
    _check_unique(screens)
    instruction = load_templates()["cluster"]["instruction"]
    builder = _NodeBuilder()

    for screen in screens:
        payload = {
            "instruction": instruction,
            "vh_lines": list(screen.vh.lines),
            "nodes": [
                {"id": node_id, "description": description}
                for node_id, description in enumerate(builder.descriptions)
            ],
        }
        if screen.luma is not None:
            payload["screenshot"] = {
                "width": screen.luma.width,
                "height": screen.luma.height,
                "luma_digest": luma_digest(screen.luma),
            }
        if oracle_labels and screen.label is not None:
            payload["hidden_label"] = screen.label

        try:
            response = await client.call(Endpoint.cluster_decide, payload)
        except ModelClientError as e:
            raise ClientUnavailable("cluster_decide", e)
        decision = ClusterDecideReply.model_validate(response.body)

        if decision.match is not None:
            if 0 <= decision.match < len(builder.members):
                builder.join(decision.match, screen.keyframe_index)
                continue
            logger.warning(
                f"⚠️ Модель вернула несуществующий узел {decision.match} для кадра "
                f"{screen.keyframe_index}; создан новый узел"
            )
            description = describe_screen(screen, len(builder.members))
        else:
            description = decision.new or describe_screen(screen, len(builder.members))
        builder.new(screen.keyframe_index, description)

    result = builder.build(ClusterMethod.model)
    logger.info(f"🗂 Кластеризация моделью: {len(screens)} экранов -> {len(result.nodes)} узлов")
    return result


def cluster_none(screens: Sequence[ScreenRecord]) -> ClusterAssignment:
    """Без кластеризации: каждый ключевой кадр - отдельный узел."""
    _check_unique(screens)
    builder = _NodeBuilder()
    for screen in screens:
        builder.new(screen.keyframe_index, describe_screen(screen, len(builder.members)))
    return builder.build(ClusterMethod.none)


# ============================================================================
# КАЧЕСТВО
# ============================================================================

def assignment_quality(pred: ClusterAssignment, gt: Mapping[int, Hashable]) -> AssignmentQuality:
    """
    Индекс Рэнда и точное совпадение разбиений (с точностью до меток).

    Raises:
        UniverseMismatch: множества ключевых кадров различаются
    """
    pred_keys, gt_keys = set(pred.assignment), set(gt)
    if pred_keys != gt_keys:
        raise UniverseMismatch(pred_keys - gt_keys, gt_keys - pred_keys)
    return AssignmentQuality(
        rand_index=rand_index(pred.assignment, gt),
        exact=same_partition(pred.assignment, gt),
    )


def partition_from_labels(screens: Sequence[ScreenRecord]) -> Dict[int, Hashable]:
    """Эталонное разбиение по скрытым меткам экранов."""
    missing = [s.keyframe_index for s in screens if s.label is None]
    if missing:
        raise ClusterError(f"Нет скрытых меток у кадров {missing[:10]}")
    return {screen.keyframe_index: screen.label for screen in screens}


# ============================================================================
# ВВОД/ВЫВОД
# ============================================================================

def save_clusters(assignment: ClusterAssignment, path: Path) -> None:
    write_json(path, assignment.to_document())


def clusters_from_document(document: dict) -> ClusterAssignment:
    return ClusterAssignment(
        method=document["method"],
        nodes=[ScreenNode.model_validate(node) for node in document["nodes"]],
        assignment={int(k): v for k, v in document["assignment"].items()},
    )


def load_clusters(path: Path) -> ClusterAssignment:
    return clusters_from_document(read_json(path))
