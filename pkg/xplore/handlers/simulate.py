"""
Подкоманда simulate: синтетический корпус из модели приложения.

Модель берется из appmodel.json (--model) либо генерируется случайно
(--seed, --screens). В каталог вывода пишутся кадры, manifest.json,
trace.jsonl, appmodel.json и gt_graph.json.
"""
import argparse

from xplore.config import settings
from xplore.handlers.common import emit, existing_file, output_dir
from xplore.models.simulation import ExplorationPolicy, PolicyKind, RenderConfig
from xplore.services.simulate_service import (
    explore,
    generate_app_model,
    load_app_model,
    render,
    visited_screens,
    write_corpus,
)
from xplore.utils.logger import get_logger
from xplore.validators import argparse_type, validate_positive_float, validate_positive_integer, validate_seed

logger = get_logger("simulate_handler")

RENDER_DEFAULTS = RenderConfig()


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.model:
        model = load_app_model(args.model)
    else:
        model = generate_app_model(args.seed, args.screens, width=args.width, height=args.height)

    policy = ExplorationPolicy(
        kind=PolicyKind(args.policy),
        seed=args.policy_seed if args.policy_seed is not None else args.seed,
        max_steps=args.max_steps,
    )
    cfg = RenderConfig(
        width=args.width,
        height=args.height,
        static_run=args.static_run,
        transition_run=args.transition_run,
        fps=args.fps,
    )
    events = explore(model, policy, size=(cfg.width, cfg.height))
    corpus = render(model, events, cfg)
    manifest_path = write_corpus(args.out, model, events, corpus)

    emit(
        f"🎬 {corpus.manifest.source_id}: экранов {len(model.screens)}, "
        f"посещено {len(visited_screens(model, events))}, событий {len(events)}, "
        f"кадров {corpus.manifest.frame_count}"
    )
    emit(f"📄 {manifest_path}")
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("simulate", help="Сгенерировать синтетический корпус")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--model", type=existing_file, help="appmodel.json")
    source.add_argument("--screens", type=argparse_type(validate_positive_integer),
                        help="Сгенерировать случайную модель с этим числом экранов")
    parser.add_argument("--seed", type=argparse_type(validate_seed), default=settings.DEFAULT_SEED)
    parser.add_argument("--policy", choices=[p.value for p in PolicyKind], default=PolicyKind.dfs.value)
    parser.add_argument("--policy-seed", type=argparse_type(validate_seed), default=None,
                        help="Seed политики random (по умолчанию --seed)")
    parser.add_argument("--max-steps", type=argparse_type(validate_positive_integer), default=200)
    parser.add_argument("--width", type=argparse_type(validate_positive_integer), default=RENDER_DEFAULTS.width)
    parser.add_argument("--height", type=argparse_type(validate_positive_integer), default=RENDER_DEFAULTS.height)
    parser.add_argument("--static-run", type=argparse_type(validate_positive_integer),
                        default=RENDER_DEFAULTS.static_run)
    parser.add_argument("--transition-run", type=argparse_type(validate_positive_integer),
                        default=RENDER_DEFAULTS.transition_run)
    parser.add_argument("--fps", type=argparse_type(validate_positive_float), default=RENDER_DEFAULTS.fps)
    parser.add_argument("--out", type=output_dir, required=True, help="Каталог корпуса")
    parser.set_defaults(handler=cmd_simulate)
