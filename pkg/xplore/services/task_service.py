"""
Сервис downstream-задач.

Все задачи сводятся к вопросам с пятью вариантами (A-E):
- загрузка/сохранение qa.jsonl и predictions.jsonl
- промпт: контекст графа + вопрос + варианты
- ответ модели: первая отдельная буква A-E, иначе воздержание
- метрики: точность по задачам, макро-среднее, Ele.Acc/Op.Acc/StepSR
- генерация вопросов по графу и эталону синтетического приложения
"""
import asyncio
import json
import re
from itertools import permutations
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from xplore.config import settings
from xplore.exceptions import (
    BadGtIndex,
    BadOptionCount,
    ClientUnavailable,
    GraphError,
    InsufficientMaterial,
    MalformedQa,
    ModelClientError,
)
from xplore.models.graph import GraphEdge, GuiTransitionGraph, PromptContext
from xplore.models.inference import Endpoint, QaAnswerReply
from xplore.models.sequence import Action, ActionKind, ElementRef
from xplore.models.simulation import AppModel, SyntheticGroundTruth
from xplore.models.tasks import (
    OPTION_COUNT,
    OPTION_LETTERS,
    AutomationMetrics,
    AutomationStep,
    PredictionRecord,
    QaItem,
    TaskKind,
    TaskMetrics,
    TaskScore,
)
from xplore.prompts import load_templates
from xplore.services.graph_service import extract_triples, usage_route
from xplore.services.model_client_service import ModelClient, build_request
from xplore.services.simulate_service import APP_POOL
from xplore.utils.calculations import iou
from xplore.utils.helpers import iter_jsonl, write_json, write_jsonl
from xplore.utils.logger import get_logger

logger = get_logger("task_service")

ANSWER_RE = re.compile(r"\b([A-E])\b")
IOU_MATCH = 0.5
TRIPLE_SCAN_LIMIT = 2000

OVERVIEW_FILLERS = (
    "A weather app showing forecasts for saved cities",
    "A music player for streaming playlists and albums",
    "A messenger for chatting with friends and groups",
    "A calculator with scientific functions",
)
SCREEN_FILLERS = ("Login", "Splash", "Onboarding", "Error Page", "Loading")
ACTION_FILLERS = tuple(
    Action(kind=kind, params=params).describe()
    for kind, params in (
        (ActionKind.swipe, "up"), (ActionKind.swipe, "down"), (ActionKind.swipe, "left"),
        (ActionKind.scroll, "up"), (ActionKind.scroll, "down"), (ActionKind.text_input, "hello"),
    )
)


# ============================================================================
# QA-ФАЙЛЫ
# ============================================================================

def _parse_item(line_no: int, document: Any) -> QaItem:
    if not isinstance(document, dict):
        raise MalformedQa(line_no, "ожидался объект")
    options = document.get("options")
    if isinstance(options, list) and len(options) != OPTION_COUNT:
        raise BadOptionCount(line_no, len(options))
    gt = document.get("gt")
    if isinstance(gt, int) and not isinstance(gt, bool) and not 0 <= gt < OPTION_COUNT:
        raise BadGtIndex(line_no, gt)
    try:
        return QaItem.model_validate(document)
    except ValidationError as e:
        first = e.errors()[0]
        raise MalformedQa(line_no, f"{'.'.join(str(p) for p in first['loc'])}: {first['msg']}")


def _read_documents(path: Path):
    for line_no, line in iter_jsonl(path):
        try:
            yield line_no, json.loads(line)
        except json.JSONDecodeError as e:
            raise MalformedQa(line_no, f"не JSON: {e.msg}")


def load_qa(path: Path) -> List[QaItem]:
    """
    Прочитать qa.jsonl.

    Raises:
        BadOptionCount: вариантов не пять
        BadGtIndex: gt вне [0, 4]
        MalformedQa: прочие нарушения (в т.ч. повторяющиеся варианты)
    """
    items = [_parse_item(line_no, document) for line_no, document in _read_documents(path)]
    logger.info(f"📚 Загружено вопросов: {len(items)} из {Path(path).name}")
    return items


def save_qa(items: Sequence[QaItem], path: Path) -> None:
    write_jsonl(path, (item.to_document() for item in items))


def save_predictions(preds: Sequence[PredictionRecord], path: Path) -> None:
    write_jsonl(path, (pred.to_document() for pred in preds))


def load_predictions(path: Path) -> List[PredictionRecord]:
    """predictions.jsonl: строки qa.jsonl с полями chosen и raw_reply."""
    preds: List[PredictionRecord] = []
    for line_no, document in _read_documents(path):
        if not isinstance(document, dict):
            raise MalformedQa(line_no, "ожидался объект")
        document = dict(document)
        chosen = document.pop("chosen", None)
        raw_reply = document.pop("raw_reply", "")
        item = _parse_item(line_no, document)
        try:
            preds.append(PredictionRecord(item=item, chosen_index=chosen, raw_reply=raw_reply))
        except ValidationError as e:
            raise MalformedQa(line_no, f"chosen: {e.errors()[0]['msg']}")
    return preds


def load_automation(path: Path) -> List[AutomationStep]:
    """Шаги автоматизации (jsonl, по одному AutomationStep на строку)."""
    steps: List[AutomationStep] = []
    for line_no, document in _read_documents(path):
        try:
            steps.append(AutomationStep.model_validate(document))
        except ValidationError as e:
            raise MalformedQa(line_no, e.errors()[0]["msg"])
    return steps


# ============================================================================
# ОТВЕТЫ
# ============================================================================

def parse_answer(reply: str) -> Optional[int]:
    """
    Первая отдельная буква A-E в ответе; None - воздержание.

    Example:
        >>> parse_answer("The answer is (B) because...")
        1
    """
    match = ANSWER_RE.search(reply or "")
    return OPTION_LETTERS.index(match.group(1)) if match else None


def build_prompt(item: QaItem, ctx: PromptContext) -> str:
    """Контекст графа, вопрос, варианты A-E и инструкция ответа."""
    templates = load_templates()["qa"]
    lines = [templates["header"], *ctx.lines, ""]
    lines.append(f"{templates['question_prefix']} {item.question}")
    lines.extend(f"{letter}. {option}" for letter, option in zip(OPTION_LETTERS, item.options))
    lines.append(templates["answer_instruction"])
    return "\n".join(lines)


async def answer_item(item: QaItem, ctx: PromptContext, client: ModelClient) -> PredictionRecord:
    """
    Задать вопрос модели (qa_answer) и разобрать ответ.

    Raises:
        ClientUnavailable: клиент не смог ответить
    """
    try:
        response = await client.call(Endpoint.qa_answer, {"prompt": build_prompt(item, ctx)})
    except ModelClientError as e:
        raise ClientUnavailable("qa_answer", e)
    reply = QaAnswerReply.model_validate(response.body).reply
    chosen = parse_answer(reply)
    if chosen is None:
        logger.debug(f"Ответ без буквы A-E для {item.task.value}: {reply[:60]!r}")
    return PredictionRecord(item=item, chosen_index=chosen, raw_reply=reply)


async def answer_items(
    items: Sequence[QaItem],
    ctx: PromptContext,
    client: ModelClient,
    concurrency: Optional[int] = None,
) -> List[PredictionRecord]:
    """Ответы на все вопросы, не больше concurrency запросов одновременно; порядок сохраняется."""
    semaphore = asyncio.Semaphore(concurrency or settings.QA_CONCURRENCY)

    async def run(item: QaItem) -> PredictionRecord:
        async with semaphore:
            return await answer_item(item, ctx, client)

    preds = await asyncio.gather(*(run(item) for item in items))
    logger.info(f"💬 Получено ответов: {len(preds)}")
    return list(preds)


def oracle_fixtures(items: Sequence[QaItem], ctx: PromptContext) -> Dict[str, Dict[str, str]]:
    """Фикстуры mock-бэкенда с правильными ответами (request_id -> {"reply": буква})."""
    return {
        build_request(Endpoint.qa_answer, {"prompt": build_prompt(item, ctx)}).request_id: {"reply": item.gt_letter}
        for item in items
    }


# ============================================================================
# МЕТРИКИ
# ============================================================================

def score_mc(preds: Sequence[PredictionRecord]) -> TaskMetrics:
    """Точность по задачам; воздержание считается ошибкой."""
    per_task: Dict[TaskKind, TaskScore] = {}
    for pred in preds:
        score = per_task.setdefault(pred.item.task, TaskScore())
        score.total += 1
        score.correct += int(pred.correct)
        score.abstained += int(pred.abstained)
    return TaskMetrics(per_task=per_task)


def element_matches(gt: ElementRef, pred: Optional[ElementRef]) -> bool:
    """resource_id совпадает (если задан у обоих), иначе IoU(bounds) >= 0.5."""
    if pred is None:
        return False
    if gt.resource_id is not None and pred.resource_id is not None:
        return gt.resource_id == pred.resource_id
    if gt.bounds is not None and pred.bounds is not None:
        return iou(gt.bounds, pred.bounds) >= IOU_MATCH
    return False


def operation_matches(step: AutomationStep) -> bool:
    if step.pred_operation != step.gt_operation:
        return False
    return step.gt_params is None or step.pred_params == step.gt_params


def score_automation(steps: Sequence[AutomationStep]) -> AutomationMetrics:
    """
    Ele.Acc, Op.Acc и StepSR (доли шагов, пустой набор - нули).

    Операция верна, если совпал тип и, когда у эталона есть params
    (текст ввода, направление прокрутки), совпали params.
    """
    total = len(steps)
    if not total:
        return AutomationMetrics(ele_acc=0.0, op_acc=0.0, step_sr=0.0, total=0)
    element_ok = [element_matches(step.gt_element, step.pred_element) for step in steps]
    operation_ok = [operation_matches(step) for step in steps]
    both = sum(1 for e, o in zip(element_ok, operation_ok) if e and o)
    return AutomationMetrics(
        ele_acc=sum(element_ok) / total,
        op_acc=sum(operation_ok) / total,
        step_sr=both / total,
        total=total,
    )


def metrics_report(metrics: TaskMetrics, automation: Optional[AutomationMetrics] = None) -> dict:
    """Документ metrics.json."""
    document = metrics.to_document()
    if automation is not None:
        document["automation"] = automation.model_dump()
    return document


def save_metrics(metrics: TaskMetrics, path: Path, automation: Optional[AutomationMetrics] = None) -> None:
    write_json(path, metrics_report(metrics, automation))


# ============================================================================
# ГЕНЕРАЦИЯ ВОПРОСОВ
# ============================================================================

def _shuffle_options(
    task: TaskKind,
    correct: str,
    distractors: Sequence[str],
    rng: np.random.Generator,
    fillers: Sequence[str] = (),
) -> tuple[List[str], int]:
    """Правильный вариант + 4 различных дистрактора, перемешанные генератором."""
    pool: List[str] = []
    for candidate in list(distractors) + list(fillers):
        if candidate != correct and candidate not in pool:
            pool.append(candidate)
    if len(pool) < OPTION_COUNT - 1:
        raise InsufficientMaterial(task.value, f"найдено {len(pool)} дистракторов из {OPTION_COUNT - 1}")
    chosen = [pool[i] for i in rng.choice(len(pool), size=OPTION_COUNT - 1, replace=False)]
    options = [correct] + chosen
    order = rng.permutation(OPTION_COUNT)
    shuffled = [options[i] for i in order]
    return shuffled, int(np.where(order == 0)[0][0])


def _replay(model: AppModel, start: str, actions: Sequence[Action]) -> Optional[str]:
    """Экран модели после действий от start; None - действие не применимо."""
    transitions = model.transition_map()
    current = start
    for action in actions:
        if action.kind == ActionKind.back:
            current = model.back_map.get(current)
        elif action.kind == ActionKind.tap and action.target and action.target.resource_id:
            current = transitions.get((current, action.target.resource_id))
        else:
            return None
        if current is None:
            return None
    return current


def _start_screen(gt: SyntheticGroundTruth) -> str:
    return gt.events[0].pre_screen if gt.events else gt.model.home


def _routes(g: GuiTransitionGraph) -> Dict[int, List[GraphEdge]]:
    routes: Dict[int, List[GraphEdge]] = {}
    for node_id in g.node_ids:
        try:
            routes[node_id] = usage_route(g, node_id)
        except GraphError:
            continue
    return routes


def _pick(rng: np.random.Generator, candidates: Sequence[Any], count: int) -> List[Any]:
    if not candidates or count <= 0:
        return []
    size = min(count, len(candidates))
    return [candidates[i] for i in rng.choice(len(candidates), size=size, replace=False)]


def _overview(g, gt, count, rng, source_id) -> List[QaItem]:
    correct = gt.model.description
    if not correct:
        raise InsufficientMaterial(TaskKind.overview.value, "у модели приложения нет описания")
    distractors = [description for _, description in APP_POOL]
    items = []
    for _ in range(count):
        options, gt_index = _shuffle_options(TaskKind.overview, correct, distractors, rng, OVERVIEW_FILLERS)
        items.append(QaItem(
            task=TaskKind.overview,
            question="What is the main purpose of this app?",
            options=options,
            gt_index=gt_index,
            source_id=source_id,
        ))
    return items


def _page_analysis(g, gt, count, rng, source_id) -> List[QaItem]:
    start = _start_screen(gt)
    routes = _routes(g)
    targets = []
    for node_id in g.node_ids:
        if node_id not in routes:
            continue
        screen_id = _replay(gt.model, start, [edge.action for edge in routes[node_id]])
        if screen_id is not None:
            targets.append((node_id, screen_id))
    if not targets:
        raise InsufficientMaterial(TaskKind.page_analysis.value, "нет узлов с известным экраном")

    descriptions = [screen.description for screen in gt.model.screens]
    items = []
    for node_id, screen_id in _pick(rng, targets, count):
        correct = gt.model.screen(screen_id).description
        options, gt_index = _shuffle_options(TaskKind.page_analysis, correct, descriptions, rng, SCREEN_FILLERS)
        items.append(QaItem(
            task=TaskKind.page_analysis,
            question=f"What is the function of the screen shown as Node {node_id}?",
            options=options,
            gt_index=gt_index,
            source_id=source_id,
            meta={"node": node_id, "screen": screen_id},
        ))
    return items


def _join(actions: Sequence[str]) -> str:
    return " -> ".join(actions)


def _usage_distractors(path: List[str], vocabulary: Sequence[str], rng: np.random.Generator) -> List[str]:
    """Перестановки, замены, укорочения и удлинения правильного пути."""
    candidates: List[str] = []
    if len(path) > 1:
        for _ in range(4):
            candidates.append(_join([path[i] for i in rng.permutation(len(path))]))
        candidates.append(_join(path[:-1]))
        candidates.append(_join(list(reversed(path))))
    for _ in range(4):
        corrupted = list(path)
        corrupted[int(rng.integers(len(path)))] = vocabulary[int(rng.integers(len(vocabulary)))]
        candidates.append(_join(corrupted))
    extra = vocabulary[int(rng.integers(len(vocabulary)))]
    candidates.append(_join(path + [extra]))
    candidates.append(_join([extra] + path))
    return candidates


def _usage(g, gt, count, rng, source_id) -> List[QaItem]:
    start = _start_screen(gt)
    routes = {n: r for n, r in _routes(g).items() if r}
    if not routes:
        raise InsufficientMaterial(TaskKind.usage.value, "нет узлов, достижимых из home")
    vocabulary = sorted({edge.action.describe() for edge in g.edges}) + list(ACTION_FILLERS)

    items = []
    for node_id in _pick(rng, sorted(routes), count):
        path = [edge.action.describe() for edge in routes[node_id]]
        correct = _join(path)
        fillers = [_join(path + ["back"] * k) for k in range(1, OPTION_COUNT)]
        options, gt_index = _shuffle_options(
            TaskKind.usage, correct, _usage_distractors(path, vocabulary, rng), rng, fillers
        )
        screen_id = _replay(gt.model, start, [edge.action for edge in routes[node_id]])
        label = f"the {gt.model.screen(screen_id).description} screen" if screen_id else "this screen"
        items.append(QaItem(
            task=TaskKind.usage,
            question=(
                f"Starting from the home screen (Node {g.home}), which sequence of operations "
                f"reaches {label} (Node {node_id})?"
            ),
            options=options,
            gt_index=gt_index,
            source_id=source_id,
            meta={"node": node_id, "path_length": len(path)},
        ))
    return items


def _action_recall(g, gt, count, rng, source_id) -> List[QaItem]:
    if not gt.events:
        raise InsufficientMaterial(TaskKind.action_recall.value, "нет событий исследования")
    vocabulary = sorted({event.action.describe() for event in gt.events})
    items = []
    for step in _pick(rng, list(range(len(gt.events))), count):
        correct = gt.events[step].action.describe()
        options, gt_index = _shuffle_options(TaskKind.action_recall, correct, vocabulary, rng, ACTION_FILLERS)
        items.append(QaItem(
            task=TaskKind.action_recall,
            question=f"Which operation was performed at step {step + 1} of the exploration?",
            options=options,
            gt_index=gt_index,
            source_id=source_id,
            meta={"step": step},
        ))
    return items


def edge_phrase(edge: GraphEdge) -> str:
    return f"{edge.action.describe()} on Node {edge.src}"


def _seq_verify(g, gt, count, rng, source_id) -> List[QaItem]:
    triples = [
        triple for triple in extract_triples(g, TRIPLE_SCAN_LIMIT)
        if len({edge_phrase(edge) for edge in triple.edges}) == 3
    ]
    if not triples:
        raise InsufficientMaterial(TaskKind.seq_verify.value, "в графе нет троек со строгим порядком")

    others = [p for p in permutations(range(3)) if p != (0, 1, 2)]
    items = []
    for triple in _pick(rng, triples, count):
        edges = triple.edges
        orders = [(0, 1, 2)] + [others[i] for i in rng.choice(len(others), size=OPTION_COUNT - 1, replace=False)]
        shuffle = rng.permutation(OPTION_COUNT)
        orders = [orders[i] for i in shuffle]
        options = [_join([edge_phrase(edges[i]) for i in order]) for order in orders]
        items.append(QaItem(
            task=TaskKind.seq_verify,
            question="In which order must these operations be performed?",
            options=options,
            gt_index=orders.index((0, 1, 2)),
            source_id=source_id,
            meta={
                "edges": [list(edge.key) for edge in edges],
                "orders": [list(order) for order in orders],
            },
        ))
    return items


GENERATORS: Dict[TaskKind, Callable[..., List[QaItem]]] = {
    TaskKind.overview: _overview,
    TaskKind.page_analysis: _page_analysis,
    TaskKind.usage: _usage,
    TaskKind.action_recall: _action_recall,
    TaskKind.seq_verify: _seq_verify,
}


def generate_qa_from_graph(
    g: GuiTransitionGraph,
    gt: SyntheticGroundTruth,
    counts: Mapping[Any, int],
    seed: int = 0,
    skip_insufficient: bool = False,
    source_id: Optional[str] = None,
) -> List[QaItem]:
    """
    Сгенерировать вопросы по графу и эталону синтетического приложения.

    Задачи обрабатываются в фиксированном порядке, все случайные выборы
    идут из одного генератора с seed, поэтому файл воспроизводим.

    Args:
        g: граф переходов (восстановленный или эталонный)
        gt: модель приложения и выполненные события
        counts: число вопросов на задачу (ключи - TaskKind или их значения)
        seed: зерно генератора
        skip_insufficient: пропускать задачи без материала (с предупреждением)
        source_id: source_id вопросов (по умолчанию имя приложения)

    Raises:
        InsufficientMaterial: для задачи нет материала и skip_insufficient=False
    """
    rng = np.random.default_rng(seed)
    wanted = {TaskKind(key): value for key, value in counts.items()}
    source_id = source_id or gt.model.name or "synthetic"
    items: List[QaItem] = []
    for task, generator in GENERATORS.items():
        count = wanted.get(task, 0)
        if count <= 0:
            continue
        try:
            items.extend(generator(g, gt, count, rng, source_id))
        except InsufficientMaterial as e:
            if not skip_insufficient:
                raise
            logger.warning(f"⚠️ Задача {task.value} пропущена: {e.reason}")
    logger.info(f"❓ Сгенерировано вопросов: {len(items)}")
    return items
