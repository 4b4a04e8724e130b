"""
Модели графа переходов GUI (GUI Transition Graph) и производных структур.
"""
from typing import FrozenSet, List, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from xplore.models.clusters import ScreenNode
from xplore.models.sequence import Action

EdgeKey = Tuple[int, int, str]


class GraphEdge(BaseModel):
    """Ребро src -> dst с действием; одинаковые (src, dst, action) сливаются."""

    model_config = ConfigDict(frozen=True)

    src: int = Field(ge=0)
    dst: int = Field(ge=0)
    action: Action
    occurrences: int = Field(default=1, ge=1)
    first_step: int = Field(default=0, ge=0)

    @property
    def key(self) -> EdgeKey:
        return self.src, self.dst, self.action.identity()

    def order_key(self) -> tuple:
        return (self.src, self.dst) + self.action.sort_key() + (self.action.identity(),)

    def to_document(self) -> dict:
        return {
            "src": self.src,
            "dst": self.dst,
            "action": self.action.model_dump(mode="json"),
            "occurrences": self.occurrences,
            "first_step": self.first_step,
        }


class GuiTransitionGraph(BaseModel):
    """Ориентированный мультиграф экранов."""

    model_config = ConfigDict(frozen=True)

    nodes: List[ScreenNode]
    edges: List[GraphEdge] = Field(default_factory=list)
    home: int

    @model_validator(mode="after")
    def _check_refs(self) -> "GuiTransitionGraph":
        ids = {node.node_id for node in self.nodes}
        if self.home not in ids:
            raise ValueError(f"home {self.home} is not a node")
        keys = set()
        for edge in self.edges:
            if edge.src not in ids or edge.dst not in ids:
                raise ValueError(f"edge {edge.src}->{edge.dst} references a missing node")
            if edge.key in keys:
                raise ValueError(f"duplicate edge {edge.key}")
            keys.add(edge.key)
        return self

    @property
    def node_ids(self) -> List[int]:
        return sorted(node.node_id for node in self.nodes)

    def node(self, node_id: int) -> ScreenNode:
        for node in self.nodes:
            if node.node_id == node_id:
                return node
        raise KeyError(node_id)

    def sorted_edges(self) -> List[GraphEdge]:
        return sorted(self.edges, key=lambda edge: edge.order_key())

    def to_document(self) -> dict:
        return {
            "home": self.home,
            "nodes": [node.to_document() for node in sorted(self.nodes, key=lambda n: n.node_id)],
            "edges": [edge.to_document() for edge in self.edges],
        }


class ReachabilitySet(BaseModel):
    model_config = ConfigDict(frozen=True)

    node_id: int
    reachable: FrozenSet[int]


class PrecedenceTriple(BaseModel):
    """Три ребра a, b, c, порядок выполнения которых задан топологией."""

    model_config = ConfigDict(frozen=True)

    a: GraphEdge
    b: GraphEdge
    c: GraphEdge

    @property
    def edges(self) -> Tuple[GraphEdge, GraphEdge, GraphEdge]:
        return self.a, self.b, self.c


class PromptContext(BaseModel):
    """Контекст графа для промпта: строки узлов и ребер в пределах бюджета."""

    model_config = ConfigDict(frozen=True)

    node_lines: List[str]
    edge_lines: List[str]
    budget: int = Field(gt=0)
    dropped_edges: int = 0

    @property
    def lines(self) -> List[str]:
        return self.node_lines + self.edge_lines

    @property
    def truncated(self) -> bool:
        return self.dropped_edges > 0

    def render(self) -> str:
        return "\n".join(self.lines)
