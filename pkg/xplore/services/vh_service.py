"""
Сервис иерархий представлений (View Hierarchy).

Разбор vh.json, каноническая сериализация, упрощение до строк
"depth|class|id|text|clickable", сходство для правиловой кластеризации
и импорт дампов uiautomator (XML) через lxml.
"""
import json
import re
from collections import Counter
from pathlib import Path
from typing import Any, List, Optional, Tuple, Union

from lxml import etree
from pydantic import ValidationError

from xplore.exceptions import DimensionMismatch, MalformedVh, SchemaViolation
from xplore.models.frames import LumaPlane
from xplore.models.vh import SimplifiedVh, ViewHierarchy, VhNode
from xplore.utils.calculations import mean_abs_luma_diff, multiset_jaccard
from xplore.utils.logger import get_logger

logger = get_logger("vh_service")

TEXT_LIMIT = 32
FIELD_SEPARATOR = "|"


# ============================================================================
# РАЗБОР И СЕРИАЛИЗАЦИЯ
# ============================================================================

def parse_vh(doc: Union[str, bytes, dict]) -> ViewHierarchy:
    """
    Разобрать документ vh.json.

    Отсутствующие id/text - None, clickable - False.

    Raises:
        MalformedVh: документ не является JSON-объектом
        SchemaViolation: поля не соответствуют схеме (в т.ч. перевернутые bounds)
    """
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise MalformedVh(str(e))
    if not isinstance(doc, dict):
        raise MalformedVh(f"ожидался объект, получен {type(doc).__name__}")
    try:
        return ViewHierarchy.model_validate(doc)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(p) for p in first["loc"])
        raise SchemaViolation(f"{location}: {first['msg']}")


def vh_to_document(vh: ViewHierarchy) -> dict:
    """Канонический документ: ключи class, id, text, bounds, clickable, children."""
    return vh.model_dump(mode="json", by_alias=True)


def serialize_vh(vh: ViewHierarchy) -> str:
    return json.dumps(vh_to_document(vh), ensure_ascii=False, separators=(",", ":"))


def load_vh(path: Path) -> ViewHierarchy:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_vh(fh.read())


# ============================================================================
# УПРОЩЕНИЕ
# ============================================================================

def _clean(value: Optional[str]) -> str:
    if not value:
        return ""
    return value.replace(FIELD_SEPARATOR, "/").replace("\r", " ").replace("\n", " ")


def _is_plain(node: VhNode) -> bool:
    return not node.resource_id and not node.text and not node.clickable


def _effective_children(node: VhNode) -> List[VhNode]:
    """Дети без узлов нулевой площади (их дети поднимаются на их место)."""
    result: List[VhNode] = []
    pending = list(reversed(node.children))
    while pending:
        child = pending.pop()
        if child.area == 0:
            pending.extend(reversed(child.children))
        else:
            result.append(child)
    return result


def format_line(depth: int, node: VhNode) -> str:
    text = _clean(node.text)[:TEXT_LIMIT]
    return FIELD_SEPARATOR.join([
        str(depth),
        _clean(node.class_name),
        _clean(node.resource_id),
        text,
        "true" if node.clickable else "false",
    ])


def simplify(vh: ViewHierarchy) -> SimplifiedVh:
    """
    Упростить иерархию до строк в прямом порядке обхода.

    - узлы нулевой площади отбрасываются, их дети поднимаются
    - цепочки контейнеров без id/text/clickable с единственным ребенком
      схлопываются в ребенка (глубина уменьшается)
    - text обрезается до 32 символов

    Example:
        container -> container -> Button(clickable) дает одну строку
        "0|Button|ok_btn|OK|true"
    """
    if vh.root.area > 0:
        tops = [vh.root]
    else:
        tops = _effective_children(vh.root)

    lines: List[str] = []
    stack: List[Tuple[VhNode, int]] = [(node, 0) for node in reversed(tops)]
    while stack:
        node, depth = stack.pop()
        children = _effective_children(node)
        if _is_plain(node) and len(children) == 1:
            stack.append((children[0], depth))
            continue
        lines.append(format_line(depth, node))
        stack.extend((child, depth + 1) for child in reversed(children))
    return SimplifiedVh(tuple(lines))


def parse_line(line: str) -> Tuple[int, str, Optional[str], Optional[str], bool]:
    """Разобрать строку упрощенной VH: (depth, class, id, text, clickable)."""
    parts = line.split(FIELD_SEPARATOR)
    if len(parts) != 5:
        raise MalformedVh(f"строка упрощенной VH должна иметь 5 полей: {line!r}")
    depth_text, class_name, resource_id, text, clickable = parts
    try:
        depth = int(depth_text)
    except ValueError:
        raise MalformedVh(f"глубина не число: {line!r}")
    if depth < 0:
        raise MalformedVh(f"отрицательная глубина: {line!r}")
    return depth, class_name, resource_id or None, text or None, clickable == "true"


def simplified_to_vh(simplified: SimplifiedVh, screen: Tuple[int, int] = (1, 1)) -> ViewHierarchy:
    """
    Восстановить дерево из упрощенной VH (все узлы получают bounds экрана).

    Несколько строк глубины 0 оборачиваются в корневой контейнер нулевой
    площади, который simplify снова отбрасывает.

    Raises:
        MalformedVh: глубины не согласуются с прямым обходом
    """
    width, height = screen
    bounds = (0, 0, width, height)
    Raw = List[Any]  # [class, id, text, clickable, children]
    roots: List[Raw] = []
    path: List[Raw] = []
    for line in simplified.lines:
        depth, class_name, resource_id, text, clickable = parse_line(line)
        if depth > len(path):
            raise MalformedVh(f"скачок глубины до {depth}: {line!r}")
        del path[depth:]
        raw: Raw = [class_name, resource_id, text, clickable, []]
        (path[-1][4] if path else roots).append(raw)
        path.append(raw)

    def build(raw: Raw) -> VhNode:
        return VhNode(
            class_name=raw[0],
            resource_id=raw[1],
            text=raw[2],
            bounds=bounds,
            clickable=raw[3],
            children=tuple(build(child) for child in raw[4]),
        )

    if len(roots) == 1:
        root = build(roots[0])
    else:
        root = VhNode(class_name="Root", bounds=(0, 0, 0, 0), children=tuple(build(r) for r in roots))
    return ViewHierarchy(screen=(width, height), root=root)


def clickable_texts(simplified: SimplifiedVh) -> List[str]:
    """Тексты кликабельных элементов в порядке обхода."""
    texts = []
    for line in simplified.lines:
        _, _, _, text, clickable = parse_line(line)
        if clickable and text:
            texts.append(text)
    return texts


# ============================================================================
# СХОДСТВО
# ============================================================================

def vh_signatures(vh: ViewHierarchy) -> Counter:
    """Мультимножество сигнатур (class_name, resource_id) всех узлов."""
    return Counter((node.class_name, node.resource_id) for node in vh.root.iter_preorder())


def simplified_signatures(simplified: SimplifiedVh) -> Counter:
    signatures: Counter = Counter()
    for line in simplified.lines:
        _, class_name, resource_id, _, _ = parse_line(line)
        signatures[(class_name, resource_id)] += 1
    return signatures


def vh_similarity(a: ViewHierarchy, b: ViewHierarchy) -> float:
    """
    Мультимножественный Жаккар по сигнатурам узлов; текст не учитывается.

    Example:
        A={x,x,y}, B={x,y,z} -> 2/4 = 0.5
    """
    return multiset_jaccard(vh_signatures(a), vh_signatures(b))


def simplified_similarity(a: SimplifiedVh, b: SimplifiedVh) -> float:
    """То же, что vh_similarity, но по строкам упрощенной VH."""
    return multiset_jaccard(simplified_signatures(a), simplified_signatures(b))


def screenshot_similarity(a: LumaPlane, b: LumaPlane) -> float:
    """
    1 - нормированная средняя абсолютная разность яркости.

    Raises:
        DimensionMismatch: плоскости разного размера
    """
    if a.size != b.size:
        raise DimensionMismatch(a.size, b.size, where="screenshot_similarity")
    return 1.0 - mean_abs_luma_diff(a.samples, b.samples)


# ============================================================================
# ИМПОРТ UIAUTOMATOR
# ============================================================================

_BOUNDS_RE = re.compile(r"\[(-?\d+),(-?\d+)\]\[(-?\d+),(-?\d+)\]")


def _parse_bounds(value: str) -> Tuple[int, int, int, int]:
    match = _BOUNDS_RE.fullmatch(value.strip())
    if not match:
        raise SchemaViolation(f"bounds не в формате [l,t][r,b]: {value!r}")
    left, top, right, bottom = (int(v) for v in match.groups())
    if left > right or top > bottom:
        raise SchemaViolation(f"перевернутые bounds {value!r}")
    return left, top, right, bottom


def import_uiautomator(xml: Union[str, bytes]) -> ViewHierarchy:
    """
    Преобразовать дамп `uiautomator dump` в ViewHierarchy.

    Корень <hierarchy> с одним <node> становится корнем дерева, с
    несколькими - они оборачиваются в контейнер размером с экран.
    Размер экрана - объединение bounds узлов верхнего уровня.

    Raises:
        MalformedVh: XML не разбирается или нет узлов
        SchemaViolation: bounds некорректны
    """
    if isinstance(xml, str):
        xml = xml.encode("utf-8")
    try:
        document = etree.fromstring(xml, parser=etree.XMLParser(resolve_entities=False))
    except etree.XMLSyntaxError as e:
        raise MalformedVh(f"XML: {e}")

    tops = [el for el in document if el.tag == "node"] if document.tag == "hierarchy" else [document]
    if not tops:
        raise MalformedVh("в дампе нет элементов <node>")

    def convert(element: Any) -> VhNode:
        return VhNode(
            class_name=element.get("class") or "View",
            resource_id=element.get("resource-id") or None,
            text=element.get("text") or element.get("content-desc") or None,
            bounds=_parse_bounds(element.get("bounds", "[0,0][0,0]")),
            clickable=element.get("clickable") == "true",
            children=tuple(convert(child) for child in element if child.tag == "node"),
        )

    nodes = [convert(el) for el in tops]
    width = max(node.bounds[2] for node in nodes)
    height = max(node.bounds[3] for node in nodes)
    if len(nodes) == 1:
        root = nodes[0]
    else:
        root = VhNode(class_name="hierarchy", bounds=(0, 0, width, height), children=tuple(nodes))
    logger.debug(f"Импортирован дамп uiautomator: {sum(1 for _ in root.iter_preorder())} узлов")
    return ViewHierarchy(screen=(max(width, 1), max(height, 1)), root=root)
