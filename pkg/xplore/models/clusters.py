"""
Модели кластеризации экранов.
"""
import enum
from typing import Dict, List

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ClusterMethod(str, enum.Enum):
    """Метод кластеризации"""
    rule = "rule"  # Сходство VH + скриншота
    model = "model"  # Последовательные решения модели
    none = "none"  # Без кластеризации (каждый кадр - свой узел)


class RuleClusterConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    tau_vh: float = Field(default=0.8, ge=0.0, le=1.0)
    tau_img: float = Field(default=0.9, ge=0.0, le=1.0)


class ScreenNode(BaseModel):
    """Узел-экран: описание, представитель (первый член) и члены по порядку."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    node_id: int = Field(alias="id", ge=0)
    description: str
    representative: int
    members: List[int] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_representative(self) -> "ScreenNode":
        if self.representative != self.members[0]:
            raise ValueError(
                f"representative {self.representative} != first member {self.members[0]}"
            )
        return self

    def to_document(self) -> dict:
        return {
            "id": self.node_id,
            "description": self.description,
            "representative": self.representative,
            "members": list(self.members),
        }


class ClusterAssignment(BaseModel):
    """Разбиение ключевых кадров на узлы (clusters.json)."""

    model_config = ConfigDict(frozen=True)

    method: ClusterMethod
    nodes: List[ScreenNode]
    assignment: Dict[int, int]

    @model_validator(mode="after")
    def _check_consistency(self) -> "ClusterAssignment":
        for expected_id, node in enumerate(self.nodes):
            if node.node_id != expected_id:
                raise ValueError(f"node ids must be dense from 0, got {node.node_id} at {expected_id}")
        seen: Dict[int, int] = {}
        for node in self.nodes:
            for member in node.members:
                if member in seen:
                    raise ValueError(f"keyframe {member} assigned to nodes {seen[member]} and {node.node_id}")
                seen[member] = node.node_id
        if seen != dict(self.assignment):
            raise ValueError("assignment map disagrees with node member lists")
        return self

    def to_document(self) -> dict:
        return {
            "method": self.method.value,
            "nodes": [node.to_document() for node in self.nodes],
            "assignment": {str(kf): self.assignment[kf] for kf in sorted(self.assignment)},
        }


class AssignmentQuality(BaseModel):
    rand_index: float
    exact: bool
