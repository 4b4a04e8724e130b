"""
Сервис оркестрации пайплайна.

Стадии выполняются последовательно:
ingest -> keyframe -> sequence -> cluster -> graph -> qa (опционально).

Каждая стадия пишет артефакты в <out>/artifacts/ и регистрирует их в
индексе ArtifactStore. Стадия перезапускается, если изменился хэш ее
входов (конфигурация + хэши содержимого предыдущих стадий), ее файлы
изменены или удалены, либо перезапускалась предыдущая стадия.
"""
import logging
import time
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Awaitable, Callable, Dict, List, Mapping, Optional, Sequence, TypeVar

import sys

if sys.version_info >= (3, 11):
    import tomllib
else:  # Python 3.10: API-compatible backport
    import tomli as tomllib

import pytz
from pydantic import ValidationError

from xplore.config import settings
from xplore.exceptions import InvalidConfig, PipelineError, StageFailed
from xplore.models.clusters import ClusterAssignment, ClusterMethod
from xplore.models.frames import FrameManifest, FrameSequence
from xplore.models.graph import GuiTransitionGraph
from xplore.models.keyframes import KeyframeResult
from xplore.models.pipeline import STAGE_ORDER, PipelineConfig, RunReport, StageReport, StageStatus
from xplore.models.sequence import ExplorationSequence
from xplore.models.tasks import TaskMetrics
from xplore.models.vh import RecordSource
from xplore.prompts import templates_digest
from xplore.services.artifact_service import REPORT_FILE, ArtifactStore
from xplore.services.cluster_service import (
    cluster_model,
    cluster_none,
    cluster_rule,
    load_clusters,
    save_clusters,
)
from xplore.services.graph_service import build_graph, export_dot, load_graph, prompt_context, save_graph
from xplore.services.ingest_service import frame_digests, load_frames, load_manifest
from xplore.services.keyframe_service import detect_keyframes, load_keyframes, save_keyframes
from xplore.services.model_client_service import ModelClient, create_client
from xplore.services.sequence_service import (
    attach_lumas,
    build_sequence,
    load_sequence,
    load_trace,
    save_sequence,
    screens_from_sequence,
)
from xplore.services.simulate_service import ground_truth_from_trace, load_app_model
from xplore.services.task_service import (
    answer_items,
    generate_qa_from_graph,
    load_predictions,
    load_qa,
    save_metrics,
    save_predictions,
    save_qa,
    score_mc,
)
from xplore.utils.helpers import atomic_write_text, canonical_json, hash_file, read_json, sha256_hex, write_json
from xplore.utils.logger import get_logger

logger = get_logger("pipeline_service")

T = TypeVar("T")

# Пути в TOML, которые разрешаются относительно файла конфигурации
PATH_KEYS = ("manifest", "trace", "out_dir", "cache_dir")
QA_PATH_KEYS = ("items", "app_model")

ARTIFACTS: Dict[str, tuple[str, ...]] = {
    "ingest": ("ingest.json",),
    "keyframe": ("keyframes.json",),
    "sequence": ("sequence.json",),
    "cluster": ("clusters.json",),
    "graph": ("graph.json", "graph.dot"),
    "qa": ("qa.jsonl", "predictions.jsonl", "metrics.json"),
}


# ============================================================================
# КОНФИГУРАЦИЯ
# ============================================================================

def _resolve(base: Path, value: Any) -> Any:
    if value is None:
        return None
    path = Path(value)
    return path if path.is_absolute() else base / path


def load_pipeline_config(path: Path, overrides: Optional[Mapping[str, Any]] = None) -> PipelineConfig:
    """
    Прочитать TOML-конфигурацию пайплайна и применить переопределения.

    Относительные пути в файле считаются от каталога файла;
    переопределения (флаги CLI) со значением None игнорируются.

    Raises:
        InvalidConfig: файл не найден, не TOML или нарушает схему
    """
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            document = tomllib.load(fh)
    except FileNotFoundError:
        raise InvalidConfig(path, "файл не найден")
    except tomllib.TOMLDecodeError as e:
        raise InvalidConfig(path, f"не TOML: {e}")

    base = path.parent
    for key in PATH_KEYS:
        if key in document:
            document[key] = _resolve(base, document[key])
    qa = document.get("qa")
    if isinstance(qa, dict):
        for key in QA_PATH_KEYS:
            if key in qa:
                qa[key] = _resolve(base, qa[key])

    for key, value in (overrides or {}).items():
        if value is not None:
            document[key] = value

    try:
        return PipelineConfig.model_validate(document)
    except ValidationError as e:
        first = e.errors()[0]
        raise InvalidConfig(path, f"{'.'.join(str(p) for p in first['loc'])}: {first['msg']}")


# ============================================================================
# СБОР ПРЕДУПРЕЖДЕНИЙ
# ============================================================================

class _WarningCollector(logging.Handler):
    """Собирает WARNING+ логов xplore за время запуска для report.json."""

    def __init__(self) -> None:
        super().__init__(level=logging.WARNING)
        self.messages: List[str] = []

    def emit(self, record: logging.LogRecord) -> None:
        self.messages.append(record.getMessage())


def _now() -> str:
    return datetime.now(pytz.timezone(settings.TIMEZONE)).isoformat(timespec="seconds")


# ============================================================================
# ЗАПУСК
# ============================================================================

@dataclass
class _Run:
    cfg: PipelineConfig
    store: ArtifactStore
    client: ModelClient
    report: RunReport
    model_identity: str = "replay"
    hashes: Dict[str, str] = field(default_factory=dict)
    ran: List[str] = field(default_factory=list)
    _frames: Optional[FrameSequence] = None

    def input_hash(self, stage: str, extra: Mapping[str, Any]) -> str:
        upstream = {name: self.hashes[name] for name in STAGE_ORDER[:STAGE_ORDER.index(stage)] if name in self.hashes}
        return sha256_hex(canonical_json({"stage": stage, "upstream": upstream, "config": extra}))

    def model_inputs(self, prompts: bool = True) -> Dict[str, Any]:
        """Входы стадии, которая обращается к модели: бэкенд и шаблоны промптов."""
        inputs: Dict[str, Any] = {"backend": self.model_identity}
        if prompts:
            inputs["templates"] = templates_digest()
        return inputs

    def frames(self, manifest: FrameManifest) -> FrameSequence:
        if self._frames is None:
            self._frames = load_frames(manifest)
        return self._frames

    async def stage(
        self,
        name: str,
        config: Mapping[str, Any],
        compute: Callable[[], Awaitable[T]],
        load: Callable[[], T],
        counts: Callable[[T], Dict[str, int]],
    ) -> T:
        """Выполнить стадию или взять результат из артефактов."""
        names = ARTIFACTS[name]
        input_hash = self.input_hash(name, config)
        started = time.perf_counter()
        try:
            if not self.ran and self.store.is_fresh(name, input_hash, names):
                result = load()
                status = StageStatus.cached
            else:
                result = await compute()
                status = StageStatus.ran
                self.ran.append(name)
            self.hashes[name] = self.store.commit(name, input_hash, names)
        except StageFailed:
            raise
        except Exception as e:
            logger.error(f"❌ Стадия {name} завершилась ошибкой: {e}")
            raise StageFailed(name, e) from e

        seconds = time.perf_counter() - started
        self.report.stages.append(StageReport(
            name=name,
            status=status,
            seconds=round(seconds, 4),
            input_hash=input_hash,
            artifact=",".join(names),
            counts=counts(result),
        ))
        icon = "▶️" if status == StageStatus.ran else "💾"
        logger.info(f"{icon} {name}: {status.value} за {seconds:.2f}s")
        return result


async def run_pipeline(cfg: PipelineConfig, client: Optional[ModelClient] = None) -> RunReport:
    """
    Выполнить пайплайн и записать report.json.

    Args:
        cfg: конфигурация запуска
        client: клиент модели (по умолчанию create_client(cfg.backend, cfg.cache_dir))

    Returns:
        RunReport: отчет со стадиями, счетчиками и токенами

    Raises:
        StageFailed: стадия завершилась ошибкой (артефакты и отчет предыдущих стадий сохраняются)
    """
    own_client = client is None
    client = client or create_client(cfg.backend, cfg.cache_dir)
    collector = _WarningCollector()
    root_logger = logging.getLogger("xplore")
    root_logger.addHandler(collector)

    store = ArtifactStore(cfg.out_dir)
    # replay отвечает из кэша того бэкенда, который его записал
    model_identity = client.backend_identity or store.last_model_identity() or client.backend_name
    report = RunReport(source_id="", seed=cfg.seed, backend=client.backend_name, started_at=_now())
    run = _Run(cfg=cfg, store=store, client=client, report=report, model_identity=model_identity)
    run_id = store.start_run("", cfg.seed, client.backend_name, client.backend_identity)
    error: Optional[str] = None

    try:
        try:
            manifest = load_manifest(cfg.manifest)
        except Exception as e:
            logger.error(f"❌ Стадия ingest завершилась ошибкой: {e}")
            raise StageFailed("ingest", e) from e
        report.source_id = manifest.source_id
        logger.info(f"🚀 Пайплайн {manifest.source_id}: {cfg.manifest} -> {cfg.out_dir}")
        await _execute(run, manifest)
    except StageFailed as e:
        error = str(e)
        raise
    finally:
        report.finished_at = _now()
        report.tokens = client.token_totals()
        report.warnings = list(collector.messages)
        root_logger.removeHandler(collector)
        write_json(Path(cfg.out_dir) / REPORT_FILE, report.model_dump(mode="json"))
        store.finish_run(run_id, run.ran, error, source_id=report.source_id)
        store.close()
        if own_client:
            await client.close()

    logger.info(
        f"✅ Пайплайн завершен: выполнено {len(run.ran)}, из кэша "
        f"{len(report.stages) - len(run.ran)}, токенов {report.total_tokens}"
    )
    return report


async def _execute(run: _Run, manifest: FrameManifest) -> None:
    cfg, store = run.cfg, run.store

    # ---------------------------------------------------------------- ingest
    ingest_document = {
        "manifest": manifest.to_document(Path(cfg.manifest).parent),
        "frame_digests": frame_digests(manifest),
    }

    async def ingest() -> FrameManifest:
        write_json(store.path("ingest.json"), ingest_document)
        return manifest

    await run.stage(
        "ingest", ingest_document, ingest, lambda: manifest,
        lambda m: {"frames": m.frame_count},
    )

    # -------------------------------------------------------------- keyframe
    async def keyframe() -> KeyframeResult:
        result = detect_keyframes(run.frames(manifest), cfg.segmenter)
        save_keyframes(result, store.path("keyframes.json"))
        return result

    keyframes = await run.stage(
        "keyframe", {"segmenter": cfg.segmenter.model_dump()}, keyframe,
        lambda: load_keyframes(store.path("keyframes.json")),
        lambda r: {"segments": len(r.segments), "keyframes": len(r.keyframes)},
    )

    # -------------------------------------------------------------- sequence
    trace_hash = hash_file(cfg.trace) if cfg.trace else None

    async def sequence() -> ExplorationSequence:
        trace = load_trace(cfg.trace) if cfg.trace else None
        result = await build_sequence(
            run.frames(manifest),
            keyframes.segments,
            trace=trace,
            client=run.client,
            vh_policy=cfg.sequence.vh_policy,
            action_policy=cfg.sequence.action_policy,
            concurrency=cfg.sequence.concurrency,
        )
        save_sequence(result, store.path("sequence.json"))
        return result

    seq = await run.stage(
        "sequence",
        {
            "trace": trace_hash,
            "vh_policy": cfg.sequence.vh_policy.value,
            "action_policy": cfg.sequence.action_policy.value,
            **run.model_inputs(prompts=False),
        },
        sequence,
        lambda: load_sequence(store.path("sequence.json")),
        lambda s: {
            "steps": len(s.steps),
            "generated_actions": sum(1 for st in s.steps if st.action_source == RecordSource.generated),
        },
    )

    # --------------------------------------------------------------- cluster
    async def cluster() -> ClusterAssignment:
        screens = screens_from_sequence(attach_lumas(seq, run.frames(manifest)))
        method = cfg.cluster.method
        if method == ClusterMethod.rule:
            result = cluster_rule(screens, cfg.cluster.rule)
        elif method == ClusterMethod.model:
            result = await cluster_model(screens, run.client, oracle_labels=cfg.cluster.oracle_labels)
        else:
            result = cluster_none(screens)
        save_clusters(result, store.path("clusters.json"))
        return result

    cluster_config = cfg.cluster.model_dump(mode="json")
    if cfg.cluster.method == ClusterMethod.model:
        cluster_config.update(run.model_inputs())

    clusters = await run.stage(
        "cluster", cluster_config, cluster,
        lambda: load_clusters(store.path("clusters.json")),
        lambda c: {"screens": len(c.assignment), "nodes": len(c.nodes)},
    )

    # ----------------------------------------------------------------- graph
    async def graph() -> GuiTransitionGraph:
        result = build_graph(seq, clusters)
        save_graph(result, store.path("graph.json"))
        atomic_write_text(store.path("graph.dot"), export_dot(result))
        return result

    g = await run.stage(
        "graph", {}, graph,
        lambda: load_graph(store.path("graph.json")),
        lambda r: {"nodes": len(r.nodes), "edges": len(r.edges)},
    )

    # -------------------------------------------------------------------- qa
    if not cfg.qa.enabled:
        return

    qa_cfg = cfg.qa
    qa_config = {
        "items": hash_file(qa_cfg.items) if qa_cfg.items and Path(qa_cfg.items).is_file() else None,
        "app_model": hash_file(qa_cfg.app_model) if qa_cfg.app_model and Path(qa_cfg.app_model).is_file() else None,
        "trace": trace_hash,
        "counts": dict(sorted(qa_cfg.counts.items())),
        "seed": cfg.seed,
        "prompt_budget": cfg.prompt_budget,
        **run.model_inputs(),
    }

    async def qa() -> TaskMetrics:
        if qa_cfg.items:
            items = load_qa(qa_cfg.items)
        elif qa_cfg.app_model and cfg.trace:
            gt = ground_truth_from_trace(load_app_model(qa_cfg.app_model), load_trace(cfg.trace))
            items = generate_qa_from_graph(g, gt, qa_cfg.counts, seed=cfg.seed, skip_insufficient=True,
                                           source_id=manifest.source_id)
        else:
            raise PipelineError("для стадии qa нужен qa.items или qa.app_model вместе с trace")
        ctx = prompt_context(g, cfg.prompt_budget)
        preds = await answer_items(items, ctx, run.client, concurrency=qa_cfg.concurrency)
        metrics = score_mc(preds)
        save_qa(items, store.path("qa.jsonl"))
        save_predictions(preds, store.path("predictions.jsonl"))
        save_metrics(metrics, store.path("metrics.json"))
        return metrics

    await run.stage(
        "qa", qa_config, qa,
        lambda: score_mc(load_predictions(store.path("predictions.jsonl"))),
        lambda m: {"items": m.total, "correct": m.correct},
    )


def load_report(out_dir: Path) -> RunReport:
    return RunReport.model_validate(read_json(Path(out_dir) / REPORT_FILE))


def artifact_tree(out_dir: Path) -> Dict[str, str]:
    """Имя файла артефакта -> SHA-256 (для сравнения запусков)."""
    root = Path(out_dir) / "artifacts"
    return {
        path.relative_to(root).as_posix(): hash_file(path)
        for path in sorted(root.rglob("*"))
        if path.is_file()
    }


def stages_in_order(names: Sequence[str]) -> List[str]:
    return [name for name in STAGE_ORDER if name in names]
