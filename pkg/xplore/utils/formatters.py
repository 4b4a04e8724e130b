"""
Форматирование результатов для вывода в консоль.
"""
from typing import Dict, Optional

from xplore.models.clusters import AssignmentQuality, ClusterAssignment
from xplore.models.graph import GuiTransitionGraph
from xplore.models.inference import EndpointUsage
from xplore.models.keyframes import KeyframeReduction, KeyframeResult
from xplore.models.pipeline import RunReport, StageStatus
from xplore.models.tasks import AutomationMetrics, TaskMetrics


def format_keyframes(result: KeyframeResult) -> str:
    """Сводка по сегментам и ключевым кадрам."""
    lines = [f"🎞️ {result.source_id}: сегментов {len(result.segments)}, ключевых кадров {len(result.keyframes)}"]
    for i, segment in enumerate(result.segments):
        lines.append(
            f"   #{i}: pre={segment.pre_keyframe} "
            f"change={segment.change_start}..{segment.change_end} post={segment.post_keyframe}"
        )
    return "\n".join(lines)


def format_reduction(report: KeyframeReduction) -> str:
    ratio = "∞" if report.ratio == float("inf") else f"{report.ratio:.2f}"
    return "\n".join([
        "📉 Сравнение методов выделения ключевых кадров:",
        f"   фиксированный интервал: {report.fixed_count} кадров, "
        f"{report.fixed_pages_per_100:.1f} экранов на 100",
        f"   по действиям:           {report.action_count} кадров, "
        f"{report.action_pages_per_100:.1f} экранов на 100",
        f"   сокращение: x{ratio}",
    ])


def format_clusters(assignment: ClusterAssignment, quality: Optional[AssignmentQuality] = None) -> str:
    lines = [f"🗂️ Кластеризация ({assignment.method.value}): узлов {len(assignment.nodes)}, "
             f"экранов {len(assignment.assignment)}"]
    for node in assignment.nodes:
        lines.append(f"   Node {node.node_id}: {node.description} ({len(node.members)})")
    if quality is not None:
        exact = "да" if quality.exact else "нет"
        lines.append(f"   Rand index: {quality.rand_index:.4f}, точное совпадение: {exact}")
    return "\n".join(lines)


def format_graph(g: GuiTransitionGraph) -> str:
    return f"🕸️ Граф: узлов {len(g.nodes)}, ребер {len(g.edges)}, главный узел {g.home}"


def format_metrics(metrics: TaskMetrics, automation: Optional[AutomationMetrics] = None) -> str:
    """Точность по задачам, макро-среднее и метрики автоматизации."""
    lines = ["📊 Метрики:"]
    for task, score in sorted(metrics.per_task.items(), key=lambda kv: kv[0].value):
        lines.append(
            f"   {task.value:<14} {score.accuracy:.3f} ({score.correct}/{score.total}, "
            f"воздержаний {score.abstained})"
        )
    lines.append(f"   macro: {metrics.macro:.3f}")
    if automation is not None:
        lines.append(
            f"   Ele.Acc {automation.ele_acc:.3f} | Op.Acc {automation.op_acc:.3f} | "
            f"StepSR {automation.step_sr:.3f} ({automation.total} шагов)"
        )
    return "\n".join(lines)


def format_tokens(tokens: Dict[str, EndpointUsage]) -> str:
    if not tokens:
        return "🪙 Токены: запросов к модели не было"
    lines = ["🪙 Токены по точкам входа:"]
    for endpoint, usage in tokens.items():
        lines.append(
            f"   {endpoint:<16} вызовов {usage.calls} (кэш {usage.cache_hits}), "
            f"токенов {usage.total_tokens}"
        )
    return "\n".join(lines)


def format_run_report(report: RunReport) -> str:
    """Отчет о запуске пайплайна."""
    lines = [f"🚀 Запуск {report.source_id} (seed={report.seed}, бэкенд {report.backend})"]
    for stage in report.stages:
        icon = "▶️" if stage.status == StageStatus.ran else "💾"
        counts = ", ".join(f"{k}={v}" for k, v in stage.counts.items())
        lines.append(f"   {icon} {stage.name:<9} {stage.status.value:<6} {stage.seconds:.3f}s  {counts}")
    lines.append(format_tokens(report.tokens))
    if report.warnings:
        lines.append(f"⚠️ Предупреждений: {len(report.warnings)}")
    return "\n".join(lines)
