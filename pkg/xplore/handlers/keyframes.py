"""
Подкоманды выделения ключевых кадров.

- extract-keyframes: сегменты действий и ключевые кадры записи
- compare-keyframes: сравнение с выборкой 1 кадр/интервал
"""
import argparse
import json

from xplore.handlers.common import emit, existing_file
from xplore.models.keyframes import SegmenterConfig
from xplore.services.ingest_service import load_frames, load_manifest
from xplore.services.keyframe_service import detect_keyframes, keyframe_reduction, save_keyframes
from xplore.utils.formatters import format_keyframes, format_reduction
from xplore.utils.logger import get_logger
from xplore.validators import argparse_type, validate_positive_float, validate_positive_integer, validate_threshold

logger = get_logger("keyframes_handler")

DEFAULTS = SegmenterConfig()


def _add_segmenter_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--manifest", type=existing_file, required=True, help="manifest.json записи")
    parser.add_argument("--theta-high", type=argparse_type(validate_threshold), default=DEFAULTS.theta_high)
    parser.add_argument("--theta-low", type=argparse_type(validate_threshold), default=DEFAULTS.theta_low)
    parser.add_argument("--min-static", type=argparse_type(validate_positive_integer), default=DEFAULTS.min_static)


def _segmenter(args: argparse.Namespace) -> SegmenterConfig:
    return SegmenterConfig(theta_high=args.theta_high, theta_low=args.theta_low, min_static=args.min_static)


def cmd_extract_keyframes(args: argparse.Namespace) -> int:
    frames = load_frames(load_manifest(args.manifest))
    result = detect_keyframes(frames, _segmenter(args))
    if args.out:
        save_keyframes(result, args.out)
        logger.info(f"💾 keyframes.json: {args.out}")
    emit(format_keyframes(result))
    return 0


def cmd_compare_keyframes(args: argparse.Namespace) -> int:
    frames = load_frames(load_manifest(args.manifest))
    result = detect_keyframes(frames, _segmenter(args))
    report = keyframe_reduction(frames, result.keyframes, args.every_seconds, segments=len(result.segments))
    if args.json:
        emit(json.dumps(report.model_dump(), ensure_ascii=False, indent=2))
    else:
        emit(format_reduction(report))
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    extract = subparsers.add_parser("extract-keyframes", help="Выделить ключевые кадры по действиям")
    _add_segmenter_arguments(extract)
    extract.add_argument("--out", default=None, help="Куда записать keyframes.json")
    extract.set_defaults(handler=cmd_extract_keyframes)

    compare = subparsers.add_parser("compare-keyframes", help="Сравнить с выборкой по фиксированному интервалу")
    _add_segmenter_arguments(compare)
    compare.add_argument("--every-seconds", type=argparse_type(validate_positive_float), default=1.0)
    compare.add_argument("--json", action="store_true", help="Вывести отчет в JSON")
    compare.set_defaults(handler=cmd_compare_keyframes)
