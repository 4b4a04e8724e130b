"""
Сервис сборки текстовой последовательности исследования.

Для каждого сегмента действия берутся экраны до/после (ключевые кадры)
и действие. VH и действие берутся из трассы, если событие трассы попало
в сегмент, иначе запрашиваются у модели (vh_generate / action_generate).
"""
import asyncio
from pathlib import Path
from typing import List, Optional, Sequence

from pydantic import ValidationError

from xplore.config import settings
from xplore.exceptions import ClientUnavailable, MalformedTrace, ModelClientError, TraceMisaligned
from xplore.models.frames import FrameSequence, LumaPlane
from xplore.models.inference import ActionGenerateReply, Endpoint, VhGenerateReply
from xplore.models.keyframes import ActionSegment
from xplore.models.pipeline import GenerationPolicy
from xplore.models.sequence import (
    Action,
    ExplorationSequence,
    ExplorationStep,
    ScreenRecord,
    TraceAlignment,
    TraceEvent,
)
from xplore.models.vh import RecordSource, SimplifiedVh, ViewHierarchy
from xplore.services.ingest_service import luma_digest
from xplore.services.model_client_service import ModelClient
from xplore.services.vh_service import simplify
from xplore.utils.helpers import iter_jsonl, read_json, write_json, write_jsonl
from xplore.utils.logger import get_logger

logger = get_logger("sequence_service")


# ============================================================================
# ТРАССА
# ============================================================================

def load_trace(path: Path) -> List[TraceEvent]:
    """
    Прочитать trace.jsonl (одно событие на строку).

    Raises:
        MalformedTrace: строка не разбирается или не соответствует схеме
    """
    events: List[TraceEvent] = []
    for line_no, line in iter_jsonl(path):
        try:
            events.append(TraceEvent.model_validate_json(line))
        except ValidationError as e:
            raise MalformedTrace(line_no, e.errors()[0]["msg"])
    return events


def save_trace(events: Sequence[TraceEvent], path: Path) -> None:
    write_jsonl(path, (event.to_document() for event in events))


def align_trace(segments: Sequence[ActionSegment], trace: Sequence[TraceEvent]) -> TraceAlignment:
    """
    Жадное сопоставление событий и сегментов.

    Событие e соответствует сегменту s, если e.frame в [change_start, change_end].
    Каждому сегменту - не больше одного события: первое совпавшее
    сопоставляется, остальные попадают в surplus_events; события вне
    всплесков - в unmatched_events.
    """
    alignment = TraceAlignment()
    order = sorted(range(len(trace)), key=lambda i: (trace[i].frame, i))
    seg_index = 0
    for event_index in order:
        frame = trace[event_index].frame
        while seg_index < len(segments) and segments[seg_index].change_end < frame:
            seg_index += 1
        if seg_index < len(segments) and segments[seg_index].change_start <= frame:
            if seg_index in alignment.matches:
                alignment.surplus_events.append(event_index)
            else:
                alignment.matches[seg_index] = event_index
        else:
            alignment.unmatched_events.append(event_index)

    alignment.unmatched_segments = [i for i in range(len(segments)) if i not in alignment.matches]
    if alignment.dropped_events:
        logger.warning(
            f"⚠️ События трассы вне сегментов отброшены: {alignment.unmatched_events}, "
            f"лишние в сегменте: {alignment.surplus_events}"
        )
    return alignment


# ============================================================================
# ГЕНЕРАЦИЯ ЧЕРЕЗ МОДЕЛЬ
# ============================================================================

def _screenshot_ref(luma: LumaPlane) -> dict:
    return {"width": luma.width, "height": luma.height, "luma_digest": luma_digest(luma)}


async def generate_vh(client: ModelClient, luma: LumaPlane) -> SimplifiedVh:
    """Запросить упрощенную VH по скриншоту."""
    try:
        response = await client.call(Endpoint.vh_generate, {"screenshot": _screenshot_ref(luma)})
    except ModelClientError as e:
        raise ClientUnavailable("vh_generate", e)
    return SimplifiedVh(tuple(VhGenerateReply.model_validate(response.body).lines))


async def generate_action(client: ModelClient, pre: ScreenRecord, post: ScreenRecord) -> Action:
    """Запросить действие по двум соседним ключевым кадрам (VH + скриншоты)."""
    payload = {
        "pre": {"vh_lines": list(pre.vh.lines)},
        "post": {"vh_lines": list(post.vh.lines)},
    }
    if pre.luma is not None and post.luma is not None:
        payload["pre"]["screenshot"] = _screenshot_ref(pre.luma)
        payload["post"]["screenshot"] = _screenshot_ref(post.luma)
    try:
        response = await client.call(Endpoint.action_generate, payload)
    except ModelClientError as e:
        raise ClientUnavailable("action_generate", e)
    return ActionGenerateReply.model_validate(response.body).action


# ============================================================================
# СБОРКА
# ============================================================================

def _use_trace(policy: GenerationPolicy, available: bool, segment_index: int) -> bool:
    if policy == GenerationPolicy.generated:
        return False
    if policy == GenerationPolicy.ground_truth and not available:
        raise TraceMisaligned([segment_index])
    return available


async def _screen(
    client: Optional[ModelClient],
    frames: FrameSequence,
    index: int,
    vh: Optional[ViewHierarchy],
    use_trace: bool,
    label: Optional[str],
) -> ScreenRecord:
    luma = frames.lumas[index]
    if use_trace and vh is not None:
        simplified, source = simplify(vh), RecordSource.ground_truth
    else:
        if client is None:
            raise ClientUnavailable("vh_generate")
        simplified, source = await generate_vh(client, luma), RecordSource.generated
    return ScreenRecord(keyframe_index=index, vh=simplified, vh_source=source, label=label, luma=luma)


async def build_sequence(
    frames: FrameSequence,
    segments: Sequence[ActionSegment],
    trace: Optional[Sequence[TraceEvent]] = None,
    client: Optional[ModelClient] = None,
    vh_policy: GenerationPolicy = GenerationPolicy.auto,
    action_policy: GenerationPolicy = GenerationPolicy.auto,
    concurrency: Optional[int] = None,
) -> ExplorationSequence:
    """
    Собрать последовательность: один шаг на сегмент, в порядке сегментов.

    Запросы к модели для разных сегментов идут параллельно (не больше
    concurrency одновременно), порядок шагов сохраняется.

    Args:
        frames: кадры записи
        segments: сегменты действий этой записи
        trace: события трассы (None - трассы нет)
        client: клиент модели для недостающих VH/действий
        vh_policy, action_policy: источник VH и действий (auto/ground_truth/generated)
        concurrency: параллелизм (по умолчанию SEQUENCE_CONCURRENCY)

    Raises:
        ClientUnavailable: нужна генерация, а клиент недоступен или ответил ошибкой
        TraceMisaligned: политика ground_truth, а для сегмента нет события
    """
    trace = list(trace or [])
    alignment = align_trace(segments, trace) if trace else TraceAlignment(
        unmatched_segments=list(range(len(segments)))
    )
    semaphore = asyncio.Semaphore(concurrency or settings.SEQUENCE_CONCURRENCY)

    async def build_step(segment_index: int, segment: ActionSegment) -> ExplorationStep:
        event_index = alignment.matches.get(segment_index)
        event = trace[event_index] if event_index is not None else None
        async with semaphore:
            use_vh = _use_trace(vh_policy, event is not None, segment_index)
            pre = await _screen(
                client, frames, segment.pre_keyframe,
                event.pre_vh if event else None, use_vh,
                event.pre_screen if event else None,
            )
            post = await _screen(
                client, frames, segment.post_keyframe,
                event.post_vh if event else None, use_vh,
                event.post_screen if event else None,
            )
            if _use_trace(action_policy, event is not None, segment_index):
                action, source = event.action, RecordSource.ground_truth
            else:
                if client is None:
                    raise ClientUnavailable("action_generate")
                action, source = await generate_action(client, pre, post), RecordSource.generated
        return ExplorationStep(pre=pre, action=action, action_source=source, post=post)

    steps = await asyncio.gather(*(build_step(i, s) for i, s in enumerate(segments)))
    sequence = ExplorationSequence(source_id=frames.manifest.source_id, steps=list(steps))
    generated = sum(1 for step in sequence.steps if step.action_source == RecordSource.generated)
    logger.info(
        f"🧩 Последовательность {sequence.source_id}: {len(sequence.steps)} шагов, "
        f"сгенерировано действий: {generated}"
    )
    return sequence


# ============================================================================
# ВВОД/ВЫВОД
# ============================================================================

def save_sequence(sequence: ExplorationSequence, path: Path) -> None:
    write_json(path, sequence.to_document())


def sequence_from_document(document: dict) -> ExplorationSequence:
    return ExplorationSequence.model_validate(document)


def load_sequence(path: Path) -> ExplorationSequence:
    return sequence_from_document(read_json(path))


def attach_lumas(sequence: ExplorationSequence, frames: FrameSequence) -> ExplorationSequence:
    """Подставить плоскости яркости из кадров в записи экранов."""
    def attach(record: ScreenRecord) -> ScreenRecord:
        return record.model_copy(update={"luma": frames.lumas[record.keyframe_index]})

    steps = [
        step.model_copy(update={"pre": attach(step.pre), "post": attach(step.post)})
        for step in sequence.steps
    ]
    return sequence.model_copy(update={"steps": steps})


def screens_from_sequence(sequence: ExplorationSequence) -> List[ScreenRecord]:
    """Уникальные экраны последовательности в порядке ключевых кадров."""
    screens = {}
    for step in sequence.steps:
        for record in (step.pre, step.post):
            screens.setdefault(record.keyframe_index, record)
    return [screens[index] for index in sorted(screens)]
