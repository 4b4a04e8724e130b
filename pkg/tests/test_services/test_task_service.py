"""
Тесты downstream-задач: QA-файлы, ответы модели, метрики, генерация вопросов.
"""
import json

import pytest

from xplore.exceptions import BadGtIndex, BadOptionCount, ClientUnavailable, InsufficientMaterial, MalformedQa
from xplore.models.clusters import ScreenNode
from xplore.models.graph import GraphEdge, GuiTransitionGraph
from xplore.models.inference import Endpoint
from xplore.models.sequence import Action, ActionKind, ElementRef
from xplore.models.simulation import SyntheticGroundTruth
from xplore.models.tasks import AutomationStep, PredictionRecord, QaItem, TaskKind
from xplore.services.graph_service import prompt_context, usage_path
from xplore.services.model_client_service import MockBackend, ModelClient, build_request
from xplore.services.simulate_service import gt_graph, simulate
from xplore.services.task_service import (
    answer_item,
    answer_items,
    build_prompt,
    element_matches,
    generate_qa_from_graph,
    load_automation,
    load_predictions,
    load_qa,
    metrics_report,
    oracle_fixtures,
    parse_answer,
    save_predictions,
    save_qa,
    score_automation,
    score_mc,
)

OPTIONS = ("alpha", "beta", "gamma", "delta", "epsilon")


def qa_item(task=TaskKind.overview, gt=0, question="What is it?"):
    return QaItem(task=task, question=question, options=OPTIONS, gt_index=gt, source_id="demo")


def write_lines(path, documents):
    path.write_text("".join(json.dumps(d) + "\n" for d in documents))
    return path


def chain_graph(n_edges):
    nodes = [
        ScreenNode(node_id=i, description=f"Screen {i}", representative=i, members=[i])
        for i in range(n_edges + 1)
    ]
    edges = [
        GraphEdge(src=i, dst=i + 1, action=Action(kind=ActionKind.tap, target=ElementRef(resource_id=f"b{i}")))
        for i in range(n_edges)
    ]
    return GuiTransitionGraph(nodes=nodes, edges=edges, home=0)


@pytest.fixture
def explored(tiny_app):
    """Эталон tiny_app после dfs и его граф."""
    gt, _ = simulate(tiny_app)
    return gt, gt_graph(tiny_app, gt.events)


# ============================================================================
# QA-ФАЙЛЫ
# ============================================================================

class TestQaFiles:
    DOCUMENT = {"task": "usage", "question": "How?", "options": list(OPTIONS), "gt": 2, "source_id": "demo"}

    def test_load(self, tmp_path):
        items = load_qa(write_lines(tmp_path / "qa.jsonl", [self.DOCUMENT]))

        assert items[0].task == TaskKind.usage
        assert items[0].gt_index == 2
        assert items[0].gt_letter == "C"

    def test_four_options(self, tmp_path):
        document = {**self.DOCUMENT, "options": list(OPTIONS[:4])}
        with pytest.raises(BadOptionCount) as exc_info:
            load_qa(write_lines(tmp_path / "qa.jsonl", [self.DOCUMENT, document]))
        assert exc_info.value.line_no == 2

    def test_gt_out_of_range(self, tmp_path):
        with pytest.raises(BadGtIndex):
            load_qa(write_lines(tmp_path / "qa.jsonl", [{**self.DOCUMENT, "gt": 5}]))

    def test_duplicate_options(self, tmp_path):
        document = {**self.DOCUMENT, "options": ["a", "a", "b", "c", "d"]}
        with pytest.raises(MalformedQa):
            load_qa(write_lines(tmp_path / "qa.jsonl", [document]))

    def test_not_json(self, tmp_path):
        path = tmp_path / "qa.jsonl"
        path.write_text("{nope\n")
        with pytest.raises(MalformedQa):
            load_qa(path)

    def test_round_trip(self, tmp_path):
        items = [qa_item(gt=1), qa_item(TaskKind.usage, gt=4)]
        path = tmp_path / "qa.jsonl"
        save_qa(items, path)
        assert load_qa(path) == items

    def test_predictions_round_trip(self, tmp_path):
        preds = [
            PredictionRecord(item=qa_item(gt=1), chosen_index=1, raw_reply="B"),
            PredictionRecord(item=qa_item(gt=0), chosen_index=None, raw_reply="unsure"),
        ]
        path = tmp_path / "predictions.jsonl"
        save_predictions(preds, path)
        assert load_predictions(path) == preds


# ============================================================================
# ОТВЕТЫ
# ============================================================================

class TestAnswers:
    @pytest.mark.parametrize("reply,expected", [
        ("C", 2),
        ("The answer is (B) because...", 1),
        ("unsure", None),
        ("", None),
        ("ANSWER: E", 4),
    ])
    def test_parse_answer(self, reply, expected):
        assert parse_answer(reply) == expected

    def test_prompt_layout(self):
        ctx = prompt_context(chain_graph(1), budget=100)
        prompt = build_prompt(qa_item(), ctx)

        assert "Node 0: Screen 0" in prompt
        assert "Node 0 --[tap b0]--> Node 1" in prompt
        assert "What is it?" in prompt
        assert "A. alpha" in prompt and "E. epsilon" in prompt

    @pytest.mark.asyncio
    async def test_fixture_reply(self):
        item = qa_item(gt=2)
        ctx = prompt_context(chain_graph(1), budget=100)
        request = build_request(Endpoint.qa_answer, {"prompt": build_prompt(item, ctx)})
        client = ModelClient(backend=MockBackend(fixtures={request.request_id: {"reply": "C"}}))

        pred = await answer_item(item, ctx, client)

        assert pred.chosen_index == 2
        assert pred.correct

    @pytest.mark.asyncio
    async def test_oracle_answers_everything(self):
        items = [qa_item(gt=i % 5, question=f"Q{i}?") for i in range(7)]
        ctx = prompt_context(chain_graph(2), budget=100)
        client = ModelClient(backend=MockBackend(fixtures=oracle_fixtures(items, ctx)))

        preds = await answer_items(items, ctx, client, concurrency=2)

        assert [p.item for p in preds] == items
        assert score_mc(preds).macro == 1.0

    @pytest.mark.asyncio
    async def test_replay_without_cache(self):
        ctx = prompt_context(chain_graph(1), budget=100)
        with pytest.raises(ClientUnavailable):
            await answer_items([qa_item()], ctx, ModelClient())


# ============================================================================
# МЕТРИКИ
# ============================================================================

class TestMetrics:
    def test_macro_is_unweighted(self):
        preds = [
            PredictionRecord(item=qa_item(TaskKind.overview, gt=0), chosen_index=0),
            PredictionRecord(item=qa_item(TaskKind.overview, gt=1), chosen_index=1),
            PredictionRecord(item=qa_item(TaskKind.usage, gt=0), chosen_index=0),
            PredictionRecord(item=qa_item(TaskKind.usage, gt=0), chosen_index=None),
        ]
        metrics = score_mc(preds)

        assert metrics.accuracy(TaskKind.overview) == 1.0
        assert metrics.accuracy(TaskKind.usage) == 0.5
        assert metrics.macro == pytest.approx(0.75)
        assert metrics.per_task[TaskKind.usage].abstained == 1
        assert (metrics.correct, metrics.total) == (3, 4)

    def test_automation_by_hand(self):
        def ref(name):
            return ElementRef(resource_id=name)

        steps = [
            AutomationStep(gt_element=ref("a"), gt_operation="tap", pred_element=ref("a"), pred_operation="tap"),
            AutomationStep(gt_element=ref("b"), gt_operation="tap", pred_element=ref("b"), pred_operation="tap"),
            AutomationStep(gt_element=ref("c"), gt_operation="tap", pred_element=ref("x"), pred_operation="tap"),
            AutomationStep(gt_element=ref("d"), gt_operation="tap", pred_operation="back"),
        ]
        metrics = score_automation(steps)

        assert (metrics.ele_acc, metrics.op_acc, metrics.step_sr) == (0.5, 0.75, 0.5)
        assert metrics.total == 4

    def test_automation_compares_params(self):
        field = ElementRef(resource_id="query")
        typed = dict(gt_element=field, gt_operation="text_input", gt_params="hello", pred_element=field)
        steps = [
            AutomationStep(**typed, pred_operation="text_input", pred_params="hello"),
            AutomationStep(**typed, pred_operation="text_input", pred_params="help"),
            AutomationStep(**typed, pred_operation="text_input"),
            AutomationStep(gt_element=field, gt_operation="tap", pred_element=field, pred_operation="tap",
                           pred_params="ignored"),
        ]
        metrics = score_automation(steps)

        assert (metrics.ele_acc, metrics.op_acc, metrics.step_sr) == (1.0, 0.5, 0.5)

    def test_automation_empty_predictions(self):
        steps = [AutomationStep(gt_element=ElementRef(resource_id="a"), gt_operation="tap")] * 3
        metrics = score_automation(steps)
        assert (metrics.ele_acc, metrics.op_acc, metrics.step_sr) == (0.0, 0.0, 0.0)

    def test_element_match_by_iou(self):
        gt = ElementRef(bounds=(0, 0, 10, 10))
        assert element_matches(gt, ElementRef(bounds=(0, 0, 10, 5)))
        assert not element_matches(gt, ElementRef(bounds=(0, 0, 10, 4)))
        assert not element_matches(gt, ElementRef(resource_id="other"))

    def test_load_automation(self, tmp_path):
        path = write_lines(tmp_path / "automation.jsonl", [
            {"gt_element": {"resource_id": "a"}, "gt_operation": "tap",
             "pred_element": {"bounds": [0, 0, 1, 1]}, "pred_operation": "tap"},
        ])
        steps = load_automation(path)
        assert steps[0].pred_element.bounds == (0, 0, 1, 1)

    def test_report_document(self):
        metrics = score_mc([PredictionRecord(item=qa_item(), chosen_index=0)])
        automation = score_automation([])
        document = metrics_report(metrics, automation)

        assert document["macro"] == 1.0
        assert document["tasks"]["overview"]["accuracy"] == 1.0
        assert document["automation"]["total"] == 0


# ============================================================================
# ГЕНЕРАЦИЯ ВОПРОСОВ
# ============================================================================

class TestGeneration:
    COUNTS = {"overview": 1, "page_analysis": 2, "usage": 2, "action_recall": 2}

    def test_items_answer_correctly(self, explored):
        gt, graph = explored
        items = generate_qa_from_graph(graph, gt, self.COUNTS, seed=3)

        assert [item.task.value for item in items] == (
            ["overview"] + ["page_analysis"] * 2 + ["usage"] * 2 + ["action_recall"] * 2
        )
        for item in items:
            assert len(set(item.options)) == 5
            correct = item.options[item.gt_index]
            if item.task == TaskKind.overview:
                assert correct == gt.model.description
            elif item.task == TaskKind.page_analysis:
                assert correct == gt.model.screen(item.meta["screen"]).description
            elif item.task == TaskKind.usage:
                assert correct == " -> ".join(a.describe() for a in usage_path(graph, item.meta["node"]))
            else:
                assert correct == gt.events[item.meta["step"]].action.describe()

    def test_deterministic(self, explored, tmp_path):
        gt, graph = explored
        first, second = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        save_qa(generate_qa_from_graph(graph, gt, self.COUNTS, seed=11), first)
        save_qa(generate_qa_from_graph(graph, gt, self.COUNTS, seed=11), second)

        assert first.read_bytes() == second.read_bytes()

    def test_seq_verify_on_chain(self, tiny_app):
        graph = chain_graph(3)
        items = generate_qa_from_graph(graph, SyntheticGroundTruth(model=tiny_app), {TaskKind.seq_verify: 1})

        assert len(items) == 1
        item = items[0]
        assert item.options[item.gt_index] == "tap b0 on Node 0 -> tap b1 on Node 1 -> tap b2 on Node 2"
        assert item.meta["orders"][item.gt_index] == [0, 1, 2]

    def test_strongly_connected_graph_has_no_order(self, explored):
        gt, graph = explored
        with pytest.raises(InsufficientMaterial) as exc_info:
            generate_qa_from_graph(graph, gt, {"seq_verify": 1})
        assert exc_info.value.task == "seq_verify"

        assert generate_qa_from_graph(graph, gt, {"seq_verify": 1}, skip_insufficient=True) == []

    def test_single_node_graph_has_no_usage(self, tiny_app):
        graph = chain_graph(0)
        with pytest.raises(InsufficientMaterial):
            generate_qa_from_graph(graph, SyntheticGroundTruth(model=tiny_app), {"usage": 1})
