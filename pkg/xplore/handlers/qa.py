"""
Подкоманды downstream-задач.

- gen-qa: вопросы по графу и модели синтетического приложения
- answer: ответы модели на вопросы с контекстом графа
- score: точность по задачам, макро-среднее и метрики автоматизации
"""
import argparse

from xplore.config import settings
from xplore.handlers.common import add_backend_arguments, client_from_args, emit, existing_file, run_async
from xplore.models.tasks import TaskKind
from xplore.services.graph_service import load_graph, prompt_context
from xplore.services.model_client_service import ModelClient, mock_backend
from xplore.services.sequence_service import load_trace
from xplore.services.simulate_service import ground_truth_from_trace, load_app_model
from xplore.services.task_service import (
    answer_items,
    generate_qa_from_graph,
    load_automation,
    load_predictions,
    load_qa,
    oracle_fixtures,
    save_metrics,
    save_predictions,
    save_qa,
    score_automation,
    score_mc,
)
from xplore.utils.formatters import format_metrics, format_tokens
from xplore.utils.logger import get_logger
from xplore.validators import argparse_type, validate_positive_integer, validate_seed, validate_task_counts

logger = get_logger("qa_handler")

DEFAULT_COUNTS = ",".join(f"{kind.value}=2" for kind in TaskKind)


def cmd_gen_qa(args: argparse.Namespace) -> int:
    g = load_graph(args.graph)
    gt = ground_truth_from_trace(load_app_model(args.app_model), load_trace(args.trace))
    items = generate_qa_from_graph(
        g, gt, args.counts, seed=args.seed, skip_insufficient=args.skip_insufficient,
    )
    save_qa(items, args.out)
    emit(f"❓ Вопросов: {len(items)} -> {args.out}")
    return 0


async def _answer(args: argparse.Namespace):
    items = load_qa(args.qa)
    ctx = prompt_context(load_graph(args.graph), args.budget)
    if args.oracle:
        client = ModelClient(backend=mock_backend(fixtures=oracle_fixtures(items, ctx)))
    else:
        client = client_from_args(args)
    async with client:
        preds = await answer_items(items, ctx, client)
        return preds, client.token_totals()


def cmd_answer(args: argparse.Namespace) -> int:
    preds, tokens = run_async(_answer(args))
    save_predictions(preds, args.out)
    emit(format_metrics(score_mc(preds)))
    emit(format_tokens(tokens))
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    metrics = score_mc(load_predictions(args.predictions))
    automation = score_automation(load_automation(args.automation)) if args.automation else None
    if args.out:
        save_metrics(metrics, args.out, automation)
    emit(format_metrics(metrics, automation))
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    gen = subparsers.add_parser("gen-qa", help="Сгенерировать вопросы по графу")
    gen.add_argument("--graph", type=existing_file, required=True)
    gen.add_argument("--app-model", type=existing_file, required=True, help="appmodel.json")
    gen.add_argument("--trace", type=existing_file, required=True, help="trace.jsonl с id экранов")
    gen.add_argument("--counts", type=argparse_type(validate_task_counts), default=DEFAULT_COUNTS,
                     help="Число вопросов: задача=N через запятую")
    gen.add_argument("--seed", type=argparse_type(validate_seed), default=settings.DEFAULT_SEED)
    gen.add_argument("--skip-insufficient", action="store_true", help="Пропускать задачи без материала")
    gen.add_argument("--out", required=True, help="Куда записать qa.jsonl")
    gen.set_defaults(handler=cmd_gen_qa)

    answer = subparsers.add_parser("answer", help="Ответить на вопросы моделью")
    answer.add_argument("--qa", type=existing_file, required=True)
    answer.add_argument("--graph", type=existing_file, required=True)
    answer.add_argument("--budget", type=argparse_type(validate_positive_integer), default=settings.PROMPT_BUDGET)
    answer.add_argument("--oracle", action="store_true", help="Mock с правильными ответами (проверка обвязки)")
    answer.add_argument("--out", required=True, help="Куда записать predictions.jsonl")
    add_backend_arguments(answer)
    answer.set_defaults(handler=cmd_answer)

    score = subparsers.add_parser("score", help="Посчитать метрики")
    score.add_argument("--predictions", type=existing_file, required=True)
    score.add_argument("--automation", type=existing_file, default=None, help="Шаги автоматизации (jsonl)")
    score.add_argument("--out", default=None, help="Куда записать metrics.json")
    score.set_defaults(handler=cmd_score)

