"""
Доменные модели GUI Xplore Toolkit.

Модели с numpy-данными (LumaPlane, FrameSequence) - dataclass'ы,
все документы артефактов - pydantic-модели.
"""
from xplore.models.clusters import (
    AssignmentQuality,
    ClusterAssignment,
    ClusterMethod,
    RuleClusterConfig,
    ScreenNode,
)
from xplore.models.frames import FrameManifest, FrameSequence, LumaPlane
from xplore.models.graph import (
    GraphEdge,
    GuiTransitionGraph,
    PrecedenceTriple,
    PromptContext,
    ReachabilitySet,
)
from xplore.models.inference import (
    BackendChoice,
    BackendKind,
    Endpoint,
    EndpointUsage,
    InferenceRequest,
    InferenceResponse,
)
from xplore.models.keyframes import (
    ActionSegment,
    KeyframeReduction,
    KeyframeResult,
    SegmenterConfig,
    YDiffSeries,
)
from xplore.models.pipeline import (
    GenerationPolicy,
    PipelineConfig,
    RunReport,
    StageReport,
    StageStatus,
)
from xplore.models.sequence import (
    Action,
    ActionKind,
    ElementRef,
    ExplorationSequence,
    ExplorationStep,
    ScreenRecord,
    TraceAlignment,
    TraceEvent,
)
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
from xplore.models.tasks import (
    AutomationMetrics,
    AutomationStep,
    PredictionRecord,
    QaItem,
    TaskKind,
    TaskMetrics,
    TaskScore,
)
from xplore.models.vh import RecordSource, SimplifiedVh, ViewHierarchy, VhNode

__all__ = [
    "Action", "ActionKind", "ActionSegment", "AppElement", "AppModel", "AppScreen",
    "AssignmentQuality", "AutomationMetrics", "AutomationStep", "BackendChoice",
    "BackendKind", "ClusterAssignment", "ClusterMethod", "ElementRef", "Endpoint",
    "EndpointUsage", "ExplorationEvent", "ExplorationPolicy", "ExplorationSequence",
    "ExplorationStep", "FrameManifest", "FrameSequence", "GenerationPolicy",
    "GraphEdge", "GuiTransitionGraph", "InferenceRequest", "InferenceResponse",
    "KeyframeReduction", "KeyframeResult", "LumaPlane", "PipelineConfig",
    "PolicyKind", "PrecedenceTriple", "PredictionRecord", "PromptContext", "QaItem",
    "ReachabilitySet", "RecordSource", "RenderConfig", "RenderedCorpus",
    "RuleClusterConfig", "RunReport", "ScreenNode", "ScreenRecord", "SegmenterConfig",
    "SimplifiedVh", "StageReport", "StageStatus", "SyntheticGroundTruth", "TaskKind",
    "TaskMetrics", "TaskScore", "TraceAlignment", "TraceEvent", "Transition",
    "VhNode", "ViewHierarchy", "YDiffSeries",
]
