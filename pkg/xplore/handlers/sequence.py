"""
Подкоманда build-sequence: последовательность исследования из кадров,
сегментов и (опционально) трассы.
"""
import argparse

from xplore.handlers.common import add_backend_arguments, client_from_args, emit, existing_file, run_async
from xplore.models.pipeline import GenerationPolicy
from xplore.models.vh import RecordSource
from xplore.services.ingest_service import load_frames, load_manifest
from xplore.services.keyframe_service import detect_keyframes, load_keyframes
from xplore.services.sequence_service import build_sequence, load_trace, save_sequence
from xplore.utils.formatters import format_tokens
from xplore.utils.logger import get_logger

logger = get_logger("sequence_handler")


async def _build(args: argparse.Namespace):
    frames = load_frames(load_manifest(args.manifest))
    if args.keyframes:
        segments = load_keyframes(args.keyframes).segments
    else:
        segments = detect_keyframes(frames).segments
    trace = load_trace(args.trace) if args.trace else None
    async with client_from_args(args) as client:
        sequence = await build_sequence(
            frames,
            segments,
            trace=trace,
            client=client,
            vh_policy=GenerationPolicy(args.vh_policy),
            action_policy=GenerationPolicy(args.action_policy),
        )
        return sequence, client.token_totals()


def cmd_build_sequence(args: argparse.Namespace) -> int:
    sequence, tokens = run_async(_build(args))
    save_sequence(sequence, args.out)
    generated = sum(1 for step in sequence.steps if step.action_source == RecordSource.generated)
    emit(f"🧩 {sequence.source_id}: шагов {len(sequence.steps)}, сгенерировано действий {generated}")
    emit(format_tokens(tokens))
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    policies = [policy.value for policy in GenerationPolicy]
    parser = subparsers.add_parser("build-sequence", help="Собрать последовательность (pre, action, post)")
    parser.add_argument("--manifest", type=existing_file, required=True)
    parser.add_argument("--keyframes", type=existing_file, default=None, help="keyframes.json (иначе выделить заново)")
    parser.add_argument("--trace", type=existing_file, default=None, help="trace.jsonl")
    parser.add_argument("--vh-policy", choices=policies, default=GenerationPolicy.auto.value)
    parser.add_argument("--action-policy", choices=policies, default=GenerationPolicy.auto.value)
    parser.add_argument("--out", required=True, help="Куда записать sequence.json")
    add_backend_arguments(parser)
    parser.set_defaults(handler=cmd_build_sequence)
