"""
Сервис выделения ключевых кадров по действиям.

Y-Diff соседних кадров -> гистерезисный сегментатор -> ключевые кадры
до и после каждого действия. Выборка с фиксированным интервалом
(1 кадр в секунду) оставлена только как база для сравнения.
"""
from pathlib import Path
from typing import List, Sequence

import numpy as np

from xplore.exceptions import IndexOutOfRange, TooFewFrames
from xplore.models.frames import FrameSequence
from xplore.models.keyframes import (
    ActionSegment,
    KeyframeReduction,
    KeyframeResult,
    SegmenterConfig,
    YDiffSeries,
)
from xplore.utils.calculations import batch_mean_abs_luma_diff
from xplore.utils.helpers import read_json, write_json
from xplore.utils.logger import get_logger, log_stage_timing

logger = get_logger("keyframe_service")


# ============================================================================
# Y-DIFF
# ============================================================================

@log_stage_timing(logger, "compute_ydiff")
def compute_ydiff(seq: FrameSequence) -> YDiffSeries:
    """
    Ряд Y-Diff: values[i] = Σ|Y[i+1] - Y[i]| / (255·w·h).

    Raises:
        TooFewFrames: меньше двух кадров

    Example:
        >>> compute_ydiff(black_then_white).values
        (1.0,)
    """
    if seq.frame_count < 2:
        raise TooFewFrames(seq.frame_count)
    values = batch_mean_abs_luma_diff(seq.stack())
    return YDiffSeries(values=tuple(float(v) for v in values))


# ============================================================================
# СЕГМЕНТАЦИЯ
# ============================================================================

def segment_actions(diffs: YDiffSeries, cfg: SegmenterConfig | None = None) -> List[ActionSegment]:
    """
    Гистерезисный конечный автомат по ряду Y-Diff.

    Всплеск открывается на первом значении > theta_high, которому
    предшествуют >= min_static значений <= theta_low (или начало записи).
    Закрывается на последнем значении > theta_low перед min_static тихими
    значениями подряд. pre = change_start - 1, post = change_end + 1;
    незакрытый к концу записи всплеск получает post = последний кадр.

    Args:
        diffs: ряд Y-Diff
        cfg: пороги (по умолчанию SegmenterConfig())

    Returns:
        List[ActionSegment]: непересекающиеся сегменты по порядку
    """
    cfg = cfg or SegmenterConfig()
    values = diffs.values
    last_frame = len(values)
    segments: List[ActionSegment] = []

    quiet_run = 0
    at_start = True
    active = False
    change_start = 0
    last_active = 0
    low_run = 0

    for i, value in enumerate(values):
        if not active:
            if value > cfg.theta_high and (at_start or quiet_run >= cfg.min_static):
                active = True
                change_start = i
                last_active = i
                low_run = 0
            elif value <= cfg.theta_low:
                quiet_run += 1
            else:
                quiet_run = 0
                at_start = False
            continue

        if value > cfg.theta_low:
            last_active = i
            low_run = 0
            continue

        low_run += 1
        if low_run >= cfg.min_static:
            segments.append(_make_segment(change_start, last_active, last_active + 1))
            active = False
            at_start = False
            quiet_run = low_run

    if active:
        segments.append(_make_segment(change_start, last_active, last_frame))
        logger.debug(f"Всплеск {change_start}..{last_active} не закрыт до конца записи")

    logger.info(f"✂️ Сегментов действий: {len(segments)} (значений Y-Diff: {len(values)})")
    return segments


def _make_segment(change_start: int, change_end: int, post: int) -> ActionSegment:
    return ActionSegment(
        pre_keyframe=max(change_start - 1, 0),
        change_start=change_start,
        change_end=change_end,
        post_keyframe=post,
    )


# ============================================================================
# КЛЮЧЕВЫЕ КАДРЫ
# ============================================================================

def extract_keyframes(seq: FrameSequence, segments: Sequence[ActionSegment]) -> List[int]:
    """
    Отсортированное объединение {pre, post} по всем сегментам без повторов.

    Raises:
        IndexOutOfRange: индекс кадра сегмента вне записи
    """
    indices = set()
    for segment in segments:
        for index in (segment.pre_keyframe, segment.post_keyframe):
            if not 0 <= index < seq.frame_count:
                raise IndexOutOfRange(index, seq.frame_count)
            indices.add(index)
    return sorted(indices)


def detect_keyframes(seq: FrameSequence, cfg: SegmenterConfig | None = None) -> KeyframeResult:
    """Y-Diff, сегментация и ключевые кадры за один вызов."""
    cfg = cfg or SegmenterConfig()
    segments = segment_actions(compute_ydiff(seq), cfg)
    return KeyframeResult(
        source_id=seq.manifest.source_id,
        config=cfg,
        segments=segments,
        keyframes=extract_keyframes(seq, segments),
    )


def save_keyframes(result: KeyframeResult, path: Path) -> None:
    write_json(path, result.to_document())


def load_keyframes(path: Path) -> KeyframeResult:
    document = read_json(path)
    return KeyframeResult(
        source_id=document["source_id"],
        config=SegmenterConfig(**document["config"]),
        segments=[ActionSegment.model_validate(s) for s in document["segments"]],
        keyframes=document["keyframes"],
    )


# ============================================================================
# СРАВНЕНИЕ С ФИКСИРОВАННЫМ ИНТЕРВАЛОМ
# ============================================================================

def sample_fixed_interval(seq: FrameSequence, every_seconds: float = 1.0) -> List[int]:
    """
    Кадры 0, round(fps·t), round(fps·2t), ... меньше frame_count.

    Используется только как база сравнения, в пайплайн не входит.
    """
    step = seq.manifest.fps * every_seconds
    indices: List[int] = []
    k = 0
    while True:
        index = int(np.floor(step * k + 0.5))
        if index >= seq.frame_count:
            break
        if not indices or index != indices[-1]:
            indices.append(index)
        k += 1
    return indices


def distinct_screens(seq: FrameSequence, indices: Sequence[int]) -> int:
    """Число различных по содержимому кадров среди выбранных."""
    return len({seq.lumas[i].samples.tobytes() for i in indices})


def keyframe_reduction(
    seq: FrameSequence,
    keyframes: Sequence[int],
    every_seconds: float = 1.0,
    segments: int = 0,
) -> KeyframeReduction:
    """
    Сравнить выделение по действиям с выборкой 1 кадр/интервал.

    ratio = fixed_count / action_count; pages_per_100 - сколько различных
    экранов приходится на 100 выбранных кадров.
    """
    fixed = sample_fixed_interval(seq, every_seconds)

    def per_100(indices: Sequence[int]) -> float:
        return 100.0 * distinct_screens(seq, indices) / len(indices) if indices else 0.0

    report = KeyframeReduction(
        fixed_count=len(fixed),
        action_count=len(keyframes),
        ratio=len(fixed) / len(keyframes) if keyframes else float("inf"),
        fixed_pages_per_100=per_100(fixed),
        action_pages_per_100=per_100(keyframes),
        segments=segments,
    )
    logger.info(
        f"📉 Ключевых кадров: {report.action_count} против {report.fixed_count} "
        f"при фиксированном интервале (x{report.ratio:.2f})"
    )
    return report
