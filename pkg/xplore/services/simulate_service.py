"""
Сервис синтетических приложений - эталон для всего пайплайна.

- generate_app_model: случайная валидная модель приложения по seed
- explore: автоматическое исследование (dfs / random)
- gt_graph: эталонный граф переходов по выполненным событиям
- render: детерминированное "видео" исследования + trace.jsonl
- write_corpus: запись корпуса (кадры, manifest, trace, appmodel, gt_graph)

Рендеринг плоский: фон экрана - уникальный оттенок серого, элементы -
прямоугольники на 2 уровня светлее фона; переход - рампа смешивания
от 50/50 к следующему экрану.
"""
from collections import deque
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from pydantic import ValidationError

from xplore.exceptions import InvalidAppModel
from xplore.models.clusters import ScreenNode
from xplore.models.frames import FrameManifest, FrameSequence, LumaPlane
from xplore.models.graph import GraphEdge, GuiTransitionGraph
from xplore.models.keyframes import SegmenterConfig
from xplore.models.sequence import Action, ActionKind, ElementRef, TraceEvent
from xplore.models.simulation import (
    AppElement,
    AppModel,
    AppScreen,
    ExplorationEvent,
    ExplorationPolicy,
    PolicyKind,
    RenderConfig,
    RenderedCorpus,
    SyntheticGroundTruth,
    Transition,
)
from xplore.models.vh import ViewHierarchy, VhNode
from xplore.services.graph_service import save_graph
from xplore.services.ingest_service import save_frames, save_manifest
from xplore.services.sequence_service import save_trace
from xplore.utils.calculations import mean_abs_luma_diff
from xplore.utils.helpers import read_json, write_json
from xplore.utils.logger import get_logger

logger = get_logger("simulate_service")

# Геометрия сгенерированных экранов
TITLE_HEIGHT = 32
ROW_TOP = 40
ROW_PITCH = 36
ROW_HEIGHT = 28
SIDE_MARGIN = 8
ELEMENT_LIFT = 2

# Пулы названий для генератора
APP_POOL: Tuple[Tuple[str, str], ...] = (
    ("Notekeeper", "A note-taking app for writing, tagging and searching notes"),
    ("FitTrack", "A fitness tracker that logs workouts and daily activity"),
    ("ShopMate", "A shopping app for browsing products and managing orders"),
    ("CityBus", "A public transport app with routes, stops and timetables"),
    ("BudgetBook", "A personal finance app for tracking expenses and budgets"),
    ("RecipeBox", "A cooking app with recipes, ingredients and meal plans"),
    ("PhotoVault", "A gallery app for organizing and sharing photos"),
    ("LinguaLeaf", "A language learning app with lessons and quizzes"),
)

SCREEN_POOL: Tuple[str, ...] = (
    "Settings", "Profile", "Search", "Notifications", "Messages", "Favorites",
    "History", "Cart", "Checkout", "Orders", "Help Center", "About",
    "Account", "Privacy", "Language", "Theme", "Downloads", "Library",
    "Calendar", "Reminders", "Statistics", "Achievements", "Friends", "Groups",
    "Editor", "Preview", "Share", "Filters", "Categories", "Details",
    "Reviews", "Map", "Payments", "Subscriptions", "Feedback", "Tutorial",
)


# ============================================================================
# МОДЕЛЬ ПРИЛОЖЕНИЯ
# ============================================================================

def validate_app_model(model: AppModel) -> AppModel:
    """
    Проверить инварианты модели приложения.

    Raises:
        InvalidAppModel: дубликаты id, висячие ссылки или недостижимые экраны
    """
    screen_ids = model.screen_ids
    if len(set(screen_ids)) != len(screen_ids):
        raise InvalidAppModel("screen_id повторяются")
    if model.home not in screen_ids:
        raise InvalidAppModel(f"home '{model.home}' не является экраном")
    if len(screen_ids) > len(BACKGROUND_PALETTE):
        raise InvalidAppModel(f"экранов больше {len(BACKGROUND_PALETTE)}")

    for screen in model.screens:
        element_ids = [element.element_id for element in screen.elements]
        if len(set(element_ids)) != len(element_ids):
            raise InvalidAppModel(f"element_id повторяются на экране {screen.screen_id}")

    graph = nx.DiGraph()
    graph.add_nodes_from(screen_ids)
    seen = set()
    for transition in model.transitions:
        if transition.screen not in screen_ids or transition.target not in screen_ids:
            raise InvalidAppModel(f"переход {transition.screen} -> {transition.target} ссылается на неизвестный экран")
        element_ids = {e.element_id for e in model.screen(transition.screen).elements}
        if transition.element not in element_ids:
            raise InvalidAppModel(f"элемент {transition.element} не найден на экране {transition.screen}")
        if (transition.screen, transition.element) in seen:
            raise InvalidAppModel(f"два перехода из ({transition.screen}, {transition.element})")
        seen.add((transition.screen, transition.element))
        graph.add_edge(transition.screen, transition.target)

    for screen_id, parent in model.back_map.items():
        if screen_id not in screen_ids or parent not in screen_ids:
            raise InvalidAppModel(f"back_map {screen_id} -> {parent} ссылается на неизвестный экран")
        if screen_id == parent:
            raise InvalidAppModel(f"back_map экрана {screen_id} указывает на него же")
        graph.add_edge(screen_id, parent)

    unreachable = set(screen_ids) - nx.descendants(graph, model.home) - {model.home}
    if unreachable:
        raise InvalidAppModel(f"экраны недостижимы из home: {sorted(unreachable)}")
    return model


def load_app_model(path: Path) -> AppModel:
    """
    Прочитать appmodel.json.

    Raises:
        InvalidAppModel: документ не соответствует схеме или инвариантам
    """
    try:
        model = AppModel.model_validate(read_json(path))
    except ValidationError as e:
        first = e.errors()[0]
        raise InvalidAppModel(f"{'.'.join(str(p) for p in first['loc'])}: {first['msg']}")
    return validate_app_model(model)


def save_app_model(model: AppModel, path: Path) -> None:
    write_json(path, model.model_dump(mode="json"))


def generate_app_model(
    seed: int,
    n_screens: int,
    max_elements: int = 4,
    extra_edge_prob: float = 0.3,
    width: int = 144,
    height: int = 256,
) -> AppModel:
    """
    Сгенерировать случайную валидную модель приложения.

    Остовное дерево от home гарантирует достижимость, back_map ведет к
    родителю в дереве; поверх дерева добавляются случайные перекрестные
    переходы (без петель). На каждом экране - некликабельный заголовок и
    до max_elements кнопок, id элементов начинаются с id экрана.

    Args:
        seed: зерно генератора
        n_screens: число экранов (>= 1)
        max_elements: максимум кнопок на экране
        extra_edge_prob: вероятность заполнить свободный слот перекрестным переходом
        width, height: размер экрана в пикселях

    Returns:
        AppModel: провалидированная модель
    """
    if n_screens < 1:
        raise InvalidAppModel(f"нужен хотя бы один экран, получено {n_screens}")
    if max_elements < 1:
        raise InvalidAppModel(f"max_elements должно быть >= 1, получено {max_elements}")
    if ROW_TOP + ROW_PITCH * (max_elements - 1) + ROW_HEIGHT > height:
        raise InvalidAppModel(f"{max_elements} кнопок не помещаются в высоту {height}")

    rng = np.random.default_rng(seed)
    screen_ids = [f"s{i}" for i in range(n_screens)]

    order = rng.permutation(len(SCREEN_POOL))
    descriptions = ["Home"]
    for i in range(1, n_screens):
        name = SCREEN_POOL[order[(i - 1) % len(SCREEN_POOL)]]
        round_no = (i - 1) // len(SCREEN_POOL)
        descriptions.append(name if round_no == 0 else f"{name} {round_no + 1}")

    targets: List[List[str]] = [[] for _ in range(n_screens)]
    back_map: Dict[str, str] = {}
    for i in range(1, n_screens):
        candidates = [p for p in range(i) if len(targets[p]) < max_elements]
        parent = candidates[int(rng.integers(len(candidates)))]
        targets[parent].append(screen_ids[i])
        back_map[screen_ids[i]] = screen_ids[parent]

    if n_screens > 1:
        for i in range(n_screens):
            for _ in range(max_elements - len(targets[i])):
                if rng.random() < extra_edge_prob:
                    target = int(rng.integers(n_screens - 1))
                    target += target >= i
                    targets[i].append(screen_ids[target])

    by_id = dict(zip(screen_ids, descriptions))
    screens: List[AppScreen] = []
    transitions: List[Transition] = []
    for i, screen_id in enumerate(screen_ids):
        elements = [AppElement(
            element_id=f"{screen_id}_title",
            bounds=(0, 0, width, TITLE_HEIGHT),
            clickable=False,
            text=descriptions[i],
        )]
        for j, target in enumerate(targets[i]):
            top = ROW_TOP + ROW_PITCH * j
            element_id = f"{screen_id}_btn{j}"
            elements.append(AppElement(
                element_id=element_id,
                bounds=(SIDE_MARGIN, top, width - SIDE_MARGIN, top + ROW_HEIGHT),
                text=f"Open {by_id[target]}",
            ))
            transitions.append(Transition(screen=screen_id, element=element_id, target=target))
        screens.append(AppScreen(screen_id=screen_id, description=descriptions[i], elements=elements))

    name, description = APP_POOL[int(rng.integers(len(APP_POOL)))]
    model = AppModel(
        name=name,
        description=description,
        screens=screens,
        transitions=transitions,
        home=screen_ids[0],
        back_map=back_map,
    )
    logger.debug(f"🎲 Модель {name} (seed={seed}): {n_screens} экранов, {len(transitions)} переходов")
    return validate_app_model(model)


# ============================================================================
# VIEW HIERARCHY ЭКРАНА
# ============================================================================

def screen_vh(model: AppModel, screen_id: str, size: Tuple[int, int] = (144, 256)) -> ViewHierarchy:
    """Полная VH экрана: корневой FrameLayout и элементы в порядке модели."""
    width, height = size
    screen = model.screen(screen_id)
    children = tuple(
        VhNode(
            class_name="Button" if element.clickable else "TextView",
            resource_id=element.element_id,
            text=element.text,
            bounds=element.bounds,
            clickable=element.clickable,
        )
        for element in screen.elements
    )
    root = VhNode(
        class_name="FrameLayout",
        resource_id=f"{screen_id}_root",
        bounds=(0, 0, width, height),
        children=children,
    )
    return ViewHierarchy(screen=(width, height), root=root)


def tap_action(element: AppElement) -> Action:
    return Action(kind=ActionKind.tap, target=ElementRef(resource_id=element.element_id, bounds=element.bounds))


# ============================================================================
# ИССЛЕДОВАНИЕ
# ============================================================================

def _moves(model: AppModel, screen_id: str, transitions: Dict[Tuple[str, str], str]) -> List[Tuple[Optional[str], Action, str]]:
    """Доступные ходы: (element_id или None для back, действие, экран после)."""
    moves: List[Tuple[Optional[str], Action, str]] = []
    parent = model.back_map.get(screen_id)
    if parent is not None:
        moves.append((None, Action(kind=ActionKind.back), parent))
    for element in model.screen(screen_id).elements:
        target = transitions.get((screen_id, element.element_id))
        if element.clickable and target is not None and target != screen_id:
            moves.append((element.element_id, tap_action(element), target))
    return moves


def _route_to_unexercised(
    model: AppModel,
    start: str,
    transitions: Dict[Tuple[str, str], str],
    pending: set,
) -> Optional[List[Tuple[Optional[str], Action, str]]]:
    """BFS до ближайшего экрана с неисполненными переходами (back первым)."""
    parents: Dict[str, Tuple[str, Tuple[Optional[str], Action, str]]] = {}
    queue = deque([start])
    seen = {start}
    while queue:
        screen_id = queue.popleft()
        if any(key[0] == screen_id for key in pending):
            route = []
            while screen_id != start:
                prev, move = parents[screen_id]
                route.append(move)
                screen_id = prev
            return list(reversed(route))
        for move in _moves(model, screen_id, transitions):
            if move[2] not in seen:
                seen.add(move[2])
                parents[move[2]] = (screen_id, move)
                queue.append(move[2])
    return None


def explore(
    model: AppModel,
    policy: Optional[ExplorationPolicy] = None,
    size: Tuple[int, int] = (144, 256),
) -> List[ExplorationEvent]:
    """
    Автоматическое исследование модели с главного экрана.

    dfs: на текущем экране нажимается первый неисполненный переход;
    если таких нет - кратчайший маршрут (back, затем элементы по
    порядку) к ближайшему экрану с неисполненными переходами, каждый
    шаг маршрута тоже событие. random: равновероятный выбор среди
    доступных ходов генератором с seed. Остановка по max_steps или
    когда исполнять больше нечего.

    Args:
        model: валидная модель приложения
        policy: политика (по умолчанию dfs, max_steps=200)
        size: размер экрана для VH событий

    Returns:
        List[ExplorationEvent]: события по порядку
    """
    policy = policy or ExplorationPolicy()
    transitions = model.transition_map()
    events: List[ExplorationEvent] = []
    vh_cache: Dict[str, ViewHierarchy] = {}

    def vh(screen_id: str) -> ViewHierarchy:
        if screen_id not in vh_cache:
            vh_cache[screen_id] = screen_vh(model, screen_id, size)
        return vh_cache[screen_id]

    def record(pre: str, action: Action, post: str) -> None:
        events.append(ExplorationEvent(pre_screen=pre, action=action, post_screen=post, pre_vh=vh(pre), post_vh=vh(post)))

    current = model.home
    if policy.kind == PolicyKind.random:
        rng = np.random.default_rng(policy.seed)
        while len(events) < policy.max_steps:
            moves = _moves(model, current, transitions)
            if not moves:
                break
            _, action, target = moves[int(rng.integers(len(moves)))]
            record(current, action, target)
            current = target
    else:
        pending = {key for key, target in transitions.items() if key[0] != target}
        pending = {key for key in pending if model.screen(key[0]).element(key[1]).clickable}
        while len(events) < policy.max_steps and pending:
            local = [
                move for move in _moves(model, current, transitions)
                if move[0] is not None and (current, move[0]) in pending
            ]
            if local:
                route = [local[0]]
            else:
                route = _route_to_unexercised(model, current, transitions, pending)
                if not route:
                    break
            for element_id, action, target in route:
                if len(events) >= policy.max_steps:
                    break
                record(current, action, target)
                pending.discard((current, element_id))
                current = target

    logger.info(f"🧭 Исследование {policy.kind.value}: {len(events)} событий")
    return events


# ============================================================================
# ЭТАЛОННЫЙ ГРАФ
# ============================================================================

def visited_screens(model: AppModel, events: Sequence[ExplorationEvent]) -> List[str]:
    """Экраны по позициям посещения: 0 - начальный, i+1 - после события i."""
    start = events[0].pre_screen if events else model.home
    return [start] + [event.post_screen for event in events]


def gt_graph(model: AppModel, events: Sequence[ExplorationEvent]) -> GuiTransitionGraph:
    """
    Эталонный граф по выполненным событиям.

    Узлы - посещенные экраны в порядке первого посещения (home - узел 0),
    члены узла - позиции посещения, описание - описание экрана. Ребра
    сливаются по (src, dst, action), first_step - индекс события.
    """
    visits = visited_screens(model, events)
    node_of: Dict[str, int] = {}
    members: Dict[str, List[int]] = {}
    for position, screen_id in enumerate(visits):
        node_of.setdefault(screen_id, len(node_of))
        members.setdefault(screen_id, []).append(position)

    nodes = [
        ScreenNode(
            node_id=node_id,
            description=model.screen(screen_id).description,
            representative=members[screen_id][0],
            members=members[screen_id],
        )
        for screen_id, node_id in node_of.items()
    ]

    edges: Dict[tuple, GraphEdge] = {}
    for step, event in enumerate(events):
        src, dst = node_of[event.pre_screen], node_of[event.post_screen]
        key = (src, dst, event.action.identity())
        if key in edges:
            edges[key] = edges[key].model_copy(update={"occurrences": edges[key].occurrences + 1})
        else:
            edges[key] = GraphEdge(src=src, dst=dst, action=event.action, first_step=step)

    return GuiTransitionGraph(nodes=nodes, edges=list(edges.values()), home=node_of[visits[0]])


def ground_truth_from_trace(model: AppModel, trace: Sequence[TraceEvent]) -> SyntheticGroundTruth:
    """
    Эталон из trace.jsonl синтетического корпуса.

    Raises:
        InvalidAppModel: у события нет pre_screen/post_screen или экран неизвестен
    """
    events: List[ExplorationEvent] = []
    for index, event in enumerate(trace):
        if event.pre_screen is None or event.post_screen is None:
            raise InvalidAppModel(f"событие трассы {index} без pre_screen/post_screen")
        if event.pre_screen not in model.screen_ids or event.post_screen not in model.screen_ids:
            raise InvalidAppModel(f"событие трассы {index} ссылается на неизвестный экран")
        events.append(ExplorationEvent(
            pre_screen=event.pre_screen,
            action=event.action,
            post_screen=event.post_screen,
            pre_vh=event.pre_vh or screen_vh(model, event.pre_screen),
            post_vh=event.post_vh or screen_vh(model, event.post_screen),
        ))
    return SyntheticGroundTruth(model=model, events=events)


# ============================================================================
# РЕНДЕРИНГ
# ============================================================================

def _palette() -> Tuple[int, ...]:
    """Оттенки фона: шаг 8, затем промежуточные, затем нечетные (все <= 253)."""
    values: List[int] = []
    for offset in (0, 4, 2, 6):
        values.extend(v for v in range(offset, 254, 8))
    values.extend(range(1, 254, 2))
    return tuple(values)


BACKGROUND_PALETTE = _palette()


def screen_shades(model: AppModel) -> Dict[str, int]:
    """Инъективное отображение screen_id -> оттенок фона (по порядку экранов)."""
    if len(model.screens) > len(BACKGROUND_PALETTE):
        raise InvalidAppModel(f"экранов больше {len(BACKGROUND_PALETTE)}")
    return {screen.screen_id: BACKGROUND_PALETTE[i] for i, screen in enumerate(model.screens)}


def render_screen(screen: AppScreen, shade: int, cfg: RenderConfig) -> np.ndarray:
    """Фон + прямоугольники элементов (обрезанные по кадру)."""
    image = np.full((cfg.height, cfg.width), shade, dtype=np.uint8)
    for element in screen.elements:
        left, top, right, bottom = element.bounds
        left, right = max(0, left), min(cfg.width, right)
        top, bottom = max(0, top), min(cfg.height, bottom)
        if left < right and top < bottom:
            image[top:bottom, left:right] = shade + ELEMENT_LIFT
    return image


def blend(a: np.ndarray, b: np.ndarray, alpha: float) -> np.ndarray:
    """(1-alpha)·a + alpha·b с округлением floor(x + 0.5)."""
    mixed = (1.0 - alpha) * a.astype(np.float64) + alpha * b.astype(np.float64)
    return np.clip(np.floor(mixed + 0.5), 0, 255).astype(np.uint8)


def event_frame(index: int, cfg: RenderConfig) -> int:
    """Кадр события: первый кадр смешивания."""
    return index * (cfg.static_run + cfg.transition_run) + cfg.static_run


def render(
    model: AppModel,
    events: Sequence[ExplorationEvent],
    cfg: Optional[RenderConfig] = None,
    source_id: Optional[str] = None,
) -> RenderedCorpus:
    """
    Отрендерить исследование в последовательность кадров.

    Каждый посещенный экран - static_run одинаковых кадров, каждое
    событие - transition_run кадров рампы alpha = 0.5 + 0.5·k/transition_run.
    Всего кадров E·(static_run + transition_run) + static_run.
    Кадр события в трассе - первый кадр рампы.

    Returns:
        RenderedCorpus: кадры (пути frames/frame_NNNNN.png относительно корпуса) и трасса
    """
    cfg = cfg or RenderConfig()
    shades = screen_shades(model)
    images: Dict[str, np.ndarray] = {}

    def image(screen_id: str) -> np.ndarray:
        if screen_id not in images:
            images[screen_id] = render_screen(model.screen(screen_id), shades[screen_id], cfg)
        return images[screen_id]

    visits = visited_screens(model, events)
    frames: List[np.ndarray] = [image(visits[0])] * cfg.static_run
    trace: List[TraceEvent] = []
    weak: List[int] = []
    segmenter = SegmenterConfig()

    for index, event in enumerate(events):
        before, after = image(event.pre_screen), image(event.post_screen)
        ramp = [
            blend(before, after, 0.5 + 0.5 * k / cfg.transition_run)
            for k in range(cfg.transition_run)
        ]
        steps = [before] + ramp + [after]
        diffs = [mean_abs_luma_diff(x, y) for x, y in zip(steps, steps[1:])]
        if diffs[0] <= segmenter.theta_high or min(diffs) <= segmenter.theta_low:
            weak.append(index)

        trace.append(TraceEvent(
            frame=event_frame(index, cfg),
            action=event.action,
            pre_vh=event.pre_vh,
            post_vh=event.post_vh,
            pre_screen=event.pre_screen,
            post_screen=event.post_screen,
        ))
        frames.extend(ramp)
        frames.extend([after] * cfg.static_run)

    if weak:
        logger.warning(
            f"⚠️ Переходы ниже порогов сегментатора по умолчанию: события {weak[:10]}"
            f"{' ...' if len(weak) > 10 else ''}"
        )

    manifest = FrameManifest(
        source_id=source_id or model.name or "synthetic",
        fps=cfg.fps,
        width=cfg.width,
        height=cfg.height,
        frame_paths=tuple(Path("frames") / f"frame_{i:05d}.png" for i in range(len(frames))),
    )
    lumas = [LumaPlane.from_array(frame) for frame in frames]
    logger.info(f"🎞 Отрендерено {len(frames)} кадров для {len(events)} событий")
    return RenderedCorpus(frames=FrameSequence(manifest=manifest, lumas=lumas), trace=trace)


# ============================================================================
# КОРПУС
# ============================================================================

def write_corpus(
    out_dir: Path,
    model: AppModel,
    events: Sequence[ExplorationEvent],
    corpus: RenderedCorpus,
) -> Path:
    """
    Записать корпус: frames/*.png, manifest.json, trace.jsonl,
    appmodel.json и gt_graph.json.

    Returns:
        Path: путь к manifest.json
    """
    out_dir = Path(out_dir)
    manifest = corpus.manifest.model_copy(update={
        "frame_paths": tuple(out_dir / p for p in corpus.manifest.frame_paths),
    })
    save_frames(corpus.frames.lumas, manifest.frame_paths)
    manifest_path = out_dir / "manifest.json"
    save_manifest(manifest, manifest_path)
    save_trace(corpus.trace, out_dir / "trace.jsonl")
    save_app_model(model, out_dir / "appmodel.json")
    save_graph(gt_graph(model, events), out_dir / "gt_graph.json")
    logger.info(f"💾 Корпус записан в {out_dir} ({corpus.manifest.frame_count} кадров)")
    return manifest_path


def simulate(
    model: AppModel,
    policy: Optional[ExplorationPolicy] = None,
    cfg: Optional[RenderConfig] = None,
) -> Tuple[SyntheticGroundTruth, RenderedCorpus]:
    """explore + render за один вызов."""
    cfg = cfg or RenderConfig()
    events = explore(model, policy, size=(cfg.width, cfg.height))
    return SyntheticGroundTruth(model=model, events=events), render(model, events, cfg)
