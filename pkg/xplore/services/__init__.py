"""
Централизованный экспорт сервисных модулей.

    from xplore.services import keyframe_service, graph_service, ...

Или конкретных функций:
    from xplore.services import detect_keyframes, build_graph, run_pipeline, ...
"""

from . import artifact_service
from . import cluster_service
from . import graph_service
from . import ingest_service
from . import keyframe_service
from . import model_client_service
from . import pipeline_service
from . import sequence_service
from . import simulate_service
from . import task_service
from . import vh_service

# ============================================================================
# INGEST / KEYFRAME
# ============================================================================
from .ingest_service import decode_frame, load_frames, load_manifest, save_manifest, to_luma
from .keyframe_service import compute_ydiff, detect_keyframes, extract_keyframes, segment_actions

# ============================================================================
# VH / SEQUENCE
# ============================================================================
from .vh_service import parse_vh, serialize_vh, simplify, vh_similarity
from .sequence_service import align_trace, build_sequence, load_trace

# ============================================================================
# MODEL CLIENT
# ============================================================================
from .model_client_service import ModelClient, create_client, mock_backend

# ============================================================================
# CLUSTER / GRAPH
# ============================================================================
from .cluster_service import assignment_quality, cluster_model, cluster_none, cluster_rule
from .graph_service import (
    build_graph,
    export_dot,
    extract_triples,
    prompt_context,
    reachability,
    strict_precedes,
    usage_path,
)

# ============================================================================
# TASKS / SIMULATE / PIPELINE
# ============================================================================
from .task_service import (
    answer_items,
    generate_qa_from_graph,
    load_qa,
    parse_answer,
    score_automation,
    score_mc,
)
from .simulate_service import explore, generate_app_model, render, simulate
from .pipeline_service import load_pipeline_config, run_pipeline

__all__ = [
    # Модули
    "artifact_service",
    "cluster_service",
    "graph_service",
    "ingest_service",
    "keyframe_service",
    "model_client_service",
    "pipeline_service",
    "sequence_service",
    "simulate_service",
    "task_service",
    "vh_service",
    # Ingest / Keyframe
    "decode_frame",
    "load_frames",
    "load_manifest",
    "save_manifest",
    "to_luma",
    "compute_ydiff",
    "detect_keyframes",
    "extract_keyframes",
    "segment_actions",
    # VH / Sequence
    "parse_vh",
    "serialize_vh",
    "simplify",
    "vh_similarity",
    "align_trace",
    "build_sequence",
    "load_trace",
    # Model client
    "ModelClient",
    "create_client",
    "mock_backend",
    # Cluster / Graph
    "assignment_quality",
    "cluster_model",
    "cluster_none",
    "cluster_rule",
    "build_graph",
    "export_dot",
    "extract_triples",
    "prompt_context",
    "reachability",
    "strict_precedes",
    "usage_path",
    # Tasks / Simulate / Pipeline
    "answer_items",
    "generate_qa_from_graph",
    "load_qa",
    "parse_answer",
    "score_automation",
    "score_mc",
    "explore",
    "generate_app_model",
    "render",
    "simulate",
    "load_pipeline_config",
    "run_pipeline",
]
