"""
Модели конфигурации и отчета пайплайна.

PipelineConfig читается из TOML-файла (pipeline_service.load_pipeline_config),
вложенные секции повторяют конфигурации модулей.
"""
import enum
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from xplore.models.clusters import ClusterMethod, RuleClusterConfig
from xplore.models.inference import BackendChoice, EndpointUsage
from xplore.models.keyframes import SegmenterConfig


class GenerationPolicy(str, enum.Enum):
    """Источник VH/действия при сборке последовательности"""
    auto = "auto"  # Трасса, если событие совпало с сегментом, иначе модель
    ground_truth = "ground_truth"  # Только трасса
    generated = "generated"  # Только модель (трасса игнорируется)


class StageStatus(str, enum.Enum):
    ran = "ran"
    cached = "cached"


STAGE_ORDER = ("ingest", "keyframe", "sequence", "cluster", "graph", "qa")


# ============================================================================
# КОНФИГУРАЦИЯ
# ============================================================================

class SequenceSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    vh_policy: GenerationPolicy = GenerationPolicy.auto
    action_policy: GenerationPolicy = GenerationPolicy.auto
    concurrency: Optional[int] = Field(default=None, ge=1)


class ClusterSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    method: ClusterMethod = ClusterMethod.rule
    rule: RuleClusterConfig = Field(default_factory=RuleClusterConfig)
    oracle_labels: bool = False


class QaSettings(BaseModel):
    """
    Стадия QA: вопросы либо из готового qa.jsonl, либо генерируются по
    модели синтетического приложения (app_model) и трассе.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    enabled: bool = False
    items: Optional[Path] = None
    app_model: Optional[Path] = None
    counts: Dict[str, int] = Field(default_factory=lambda: {
        "overview": 1,
        "page_analysis": 2,
        "usage": 2,
        "action_recall": 2,
        "seq_verify": 2,
    })
    concurrency: Optional[int] = Field(default=None, ge=1)


class PipelineConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    manifest: Path
    trace: Optional[Path] = None
    out_dir: Path = Path("xplore_out")
    segmenter: SegmenterConfig = Field(default_factory=SegmenterConfig)
    sequence: SequenceSettings = Field(default_factory=SequenceSettings)
    cluster: ClusterSettings = Field(default_factory=ClusterSettings)
    qa: QaSettings = Field(default_factory=QaSettings)
    backend: BackendChoice = BackendChoice.auto
    cache_dir: Optional[Path] = None
    prompt_budget: int = Field(default=4000, gt=0)
    seed: int = 0


# ============================================================================
# ОТЧЕТ
# ============================================================================

class StageReport(BaseModel):
    name: str
    status: StageStatus
    seconds: float
    input_hash: str
    artifact: str
    counts: Dict[str, int] = Field(default_factory=dict)


class RunReport(BaseModel):
    """report.json: стадии, счетчики, токены по точкам входа."""

    source_id: str
    seed: int
    backend: str
    started_at: str
    finished_at: str = ""
    stages: List[StageReport] = Field(default_factory=list)
    tokens: Dict[str, EndpointUsage] = Field(default_factory=dict)
    warnings: List[str] = Field(default_factory=list)

    def stage(self, name: str) -> StageReport:
        for stage in self.stages:
            if stage.name == name:
                return stage
        raise KeyError(name)

    @property
    def ran_stages(self) -> List[str]:
        return [stage.name for stage in self.stages if stage.status == StageStatus.ran]

    @property
    def total_tokens(self) -> int:
        return sum(usage.total_tokens for usage in self.tokens.values())
