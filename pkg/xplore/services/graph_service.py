"""
Сервис графа переходов GUI.

Построение графа из последовательности и разбиения, достижимость,
тройки операций со строгим порядком, путь от главного экрана к цели,
контекст для промптов и экспорт в DOT/JSON.

Алгоритмы обхода используют networkx (MultiDiGraph).
"""
from collections import deque
from itertools import product
from pathlib import Path
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from xplore.exceptions import (
    BudgetTooSmallForNodes,
    EdgeNotInGraph,
    GraphError,
    UnassignedKeyframe,
    UnknownNode,
    Unreachable,
)
from xplore.models.clusters import ClusterAssignment, ScreenNode
from xplore.models.graph import (
    GraphEdge,
    GuiTransitionGraph,
    PrecedenceTriple,
    PromptContext,
    ReachabilitySet,
)
from xplore.models.sequence import Action, ExplorationSequence
from xplore.utils.helpers import read_json, word_count, write_json
from xplore.utils.logger import get_logger

logger = get_logger("graph_service")

Reach = Mapping[int, FrozenSet[int]]


# ============================================================================
# ПОСТРОЕНИЕ
# ============================================================================

def build_graph(seq: ExplorationSequence, clusters: ClusterAssignment) -> GuiTransitionGraph:
    """
    Граф из последовательности: на каждый шаг ребро assign(pre) -> assign(post).

    Одинаковые (src, dst, action) сливаются с увеличением occurrences;
    петли допускаются. home - узел первого ключевого кадра.

    Raises:
        UnassignedKeyframe: кадр шага не отнесен ни к одному узлу
        GraphError: нет ни одного узла
    """
    def node_of(keyframe: int) -> int:
        if keyframe not in clusters.assignment:
            raise UnassignedKeyframe(keyframe)
        return clusters.assignment[keyframe]

    edges: Dict[Tuple, GraphEdge] = {}
    for step_index, step in enumerate(seq.steps):
        src, dst = node_of(step.pre.keyframe_index), node_of(step.post.keyframe_index)
        key = (src, dst, step.action.identity())
        if key in edges:
            edge = edges[key]
            edges[key] = edge.model_copy(update={"occurrences": edge.occurrences + 1})
        else:
            edges[key] = GraphEdge(src=src, dst=dst, action=step.action, first_step=step_index)

    if not clusters.nodes:
        raise GraphError("Нельзя построить граф без узлов")
    if seq.steps:
        home = node_of(seq.steps[0].pre.keyframe_index)
    else:
        home = clusters.assignment[min(clusters.assignment)]

    graph = GuiTransitionGraph(nodes=list(clusters.nodes), edges=list(edges.values()), home=home)
    logger.info(f"🕸 Граф: {len(graph.nodes)} узлов, {len(graph.edges)} ребер, home={home}")
    return graph


def to_networkx(g: GuiTransitionGraph) -> nx.MultiDiGraph:
    """MultiDiGraph с атрибутами description (узлы) и action/occurrences (ребра)."""
    graph = nx.MultiDiGraph()
    for node in g.nodes:
        graph.add_node(node.node_id, description=node.description)
    for edge in g.edges:
        graph.add_edge(
            edge.src, edge.dst,
            key=edge.action.identity(),
            action=edge.action.describe(),
            occurrences=edge.occurrences,
        )
    return graph


# ============================================================================
# ДОСТИЖИМОСТЬ И ПОРЯДОК
# ============================================================================

def reachability_map(g: GuiTransitionGraph) -> Dict[int, FrozenSet[int]]:
    """node_id -> множество достижимых узлов (включая сам узел)."""
    graph = to_networkx(g)
    return {n: frozenset(nx.descendants(graph, n) | {n}) for n in g.node_ids}


def reachability(g: GuiTransitionGraph) -> List[ReachabilitySet]:
    """Множество достижимости для каждого узла, по возрастанию id."""
    reach = reachability_map(g)
    return [ReachabilitySet(node_id=n, reachable=reach[n]) for n in sorted(reach)]


def _require_edge(g: GuiTransitionGraph, edge: GraphEdge) -> None:
    if edge.key not in {e.key for e in g.edges}:
        raise EdgeNotInGraph(edge.key)


def strict_precedes(g: GuiTransitionGraph, e1: GraphEdge, e2: GraphEdge, reach: Optional[Reach] = None) -> bool:
    """
    e1 строго раньше e2: e2.src достижим из e1.dst, а e1.src не достижим из e2.dst.

    Raises:
        EdgeNotInGraph: ребра нет в графе
    """
    _require_edge(g, e1)
    _require_edge(g, e2)
    reach = reach if reach is not None else reachability_map(g)
    return _precedes(reach, e1, e2)


def _precedes(reach: Reach, e1: GraphEdge, e2: GraphEdge) -> bool:
    return e2.src in reach[e1.dst] and e1.src not in reach[e2.dst]


def extract_triples(g: GuiTransitionGraph, limit: int) -> List[PrecedenceTriple]:
    """
    Тройки (a, b, c) с strict_precedes(a, b) и strict_precedes(b, c).

    Порядок лексикографический по ключам ребер, обрезается до limit.
    """
    if limit <= 0:
        return []
    reach = reachability_map(g)
    edges = g.sorted_edges()
    after: Dict[int, List[int]] = {
        i: [j for j, e2 in enumerate(edges) if _precedes(reach, e1, e2)]
        for i, e1 in enumerate(edges)
    }

    triples: List[PrecedenceTriple] = []
    for i in range(len(edges)):
        for j in after[i]:
            for k in after[j]:
                triples.append(PrecedenceTriple(a=edges[i], b=edges[j], c=edges[k]))
                if len(triples) >= limit:
                    return triples
    return triples


# ============================================================================
# ПУТЬ ОТ ГЛАВНОГО ЭКРАНА
# ============================================================================

def usage_route(g: GuiTransitionGraph, target: int) -> List[GraphEdge]:
    """
    Кратчайший путь home -> target в ребрах.

    Из равных по длине путей выбирается лексикографически наименьшая
    последовательность id узлов; из параллельных ребер - ребро с
    наименьшим ключом.

    Raises:
        UnknownNode: target нет в графе
        Unreachable: пути нет
    """
    if target not in g.node_ids:
        raise UnknownNode(target)
    if target == g.home:
        return []

    # расстояния до target по обратным ребрам
    graph = to_networkx(g)
    distance = nx.single_source_shortest_path_length(graph.reverse(copy=False), target)
    if g.home not in distance:
        raise Unreachable(g.home, target)

    by_pair: Dict[Tuple[int, int], GraphEdge] = {}
    for edge in g.sorted_edges():
        by_pair.setdefault((edge.src, edge.dst), edge)

    route: List[GraphEdge] = []
    current = g.home
    while current != target:
        step = min(
            v for v in graph.successors(current)
            if distance.get(v) == distance[current] - 1
        )
        route.append(by_pair[(current, step)])
        current = step
    return route


def usage_path(g: GuiTransitionGraph, target: int) -> List[Action]:
    """Действия по кратчайшему пути home -> target."""
    return [edge.action for edge in usage_route(g, target)]


# ============================================================================
# КОНТЕКСТ ДЛЯ ПРОМПТА
# ============================================================================

def node_line(node: ScreenNode) -> str:
    return f"Node {node.node_id}: {node.description}"


def edge_line(edge: GraphEdge) -> str:
    return f"Node {edge.src} --[{edge.action.describe()}]--> Node {edge.dst}"


def prompt_context(g: GuiTransitionGraph, budget: int) -> PromptContext:
    """
    Строки узлов (по id) и ребер (по ключу) в пределах бюджета токенов.

    При превышении бюджета ребра удаляются начиная с наименьшего
    occurrences (при равенстве - по порядку).

    Raises:
        BudgetTooSmallForNodes: строки узлов сами не помещаются в бюджет
    """
    if budget <= 0:
        raise ValueError(f"budget must be positive, got {budget}")
    node_lines = [node_line(node) for node in sorted(g.nodes, key=lambda n: n.node_id)]
    node_tokens = sum(word_count(line) for line in node_lines)
    if node_tokens > budget:
        raise BudgetTooSmallForNodes(budget, node_tokens)

    edges = g.sorted_edges()
    costs = [word_count(edge_line(edge)) for edge in edges]
    total = node_tokens + sum(costs)
    kept = [True] * len(edges)
    drop_order = sorted(range(len(edges)), key=lambda i: (edges[i].occurrences, i))
    dropped = 0
    for i in drop_order:
        if total <= budget:
            break
        kept[i] = False
        total -= costs[i]
        dropped += 1

    if dropped:
        logger.warning(f"✂️ Контекст графа обрезан: удалено {dropped} из {len(edges)} ребер (бюджет {budget})")
    return PromptContext(
        node_lines=node_lines,
        edge_lines=[edge_line(edge) for edge, keep in zip(edges, kept) if keep],
        budget=budget,
        dropped_edges=dropped,
    )


# ============================================================================
# ЭКСПОРТ
# ============================================================================

def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")


def export_dot(g: GuiTransitionGraph) -> str:
    """DOT: id узлов как идентификаторы, описания как подписи; home - двойной контур."""
    lines = ["digraph gui_transition_graph {", "  rankdir=LR;"]
    for node in sorted(g.nodes, key=lambda n: n.node_id):
        extra = ", peripheries=2" if node.node_id == g.home else ""
        lines.append(f'  {node.node_id} [label="{_dot_escape(node.description)}"{extra}];')
    for edge in g.sorted_edges():
        label = edge.action.describe()
        if edge.occurrences > 1:
            label += f" x{edge.occurrences}"
        lines.append(f'  {edge.src} -> {edge.dst} [label="{_dot_escape(label)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_json(g: GuiTransitionGraph) -> dict:
    return g.to_document()


def graph_from_document(document: dict) -> GuiTransitionGraph:
    return GuiTransitionGraph(
        home=document["home"],
        nodes=[ScreenNode.model_validate(node) for node in document["nodes"]],
        edges=[GraphEdge.model_validate(edge) for edge in document["edges"]],
    )


def save_graph(g: GuiTransitionGraph, path: Path) -> None:
    write_json(path, export_json(g))


def load_graph(path: Path) -> GuiTransitionGraph:
    return graph_from_document(read_json(path))


# ============================================================================
# ЭТАЛОННЫЕ ПРОВЕРКИ
# ============================================================================

def transitive_closure(node_ids: Sequence[int], arcs: Sequence[Tuple[int, int]]) -> Dict[int, FrozenSet[int]]:
    """Рефлексивно-транзитивное замыкание по Флойду-Уоршеллу (для сверки)."""
    index = {n: i for i, n in enumerate(node_ids)}
    size = len(node_ids)
    reach = [[i == j for j in range(size)] for i in range(size)]
    for src, dst in arcs:
        reach[index[src]][index[dst]] = True
    for k, i, j in product(range(size), repeat=3):
        if reach[i][k] and reach[k][j]:
            reach[i][j] = True
    return {n: frozenset(m for m in node_ids if reach[index[n]][index[m]]) for n in node_ids}


def bfs_distance(g: GuiTransitionGraph, source: int, target: int) -> Optional[int]:
    """Длина кратчайшего пути обычным BFS без networkx (None - пути нет)."""
    successors: Dict[int, List[int]] = {}
    for edge in g.edges:
        successors.setdefault(edge.src, []).append(edge.dst)
    seen = {source: 0}
    queue = deque([source])
    while queue:
        node = queue.popleft()
        if node == target:
            return seen[node]
        for nxt in successors.get(node, []):
            if nxt not in seen:
                seen[nxt] = seen[node] + 1
                queue.append(nxt)
    return None
