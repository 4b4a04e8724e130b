"""
Тесты синтетических приложений: модель, исследование, эталонный граф, рендеринг.
"""
import json

import pytest

from xplore.exceptions import InvalidAppModel
from xplore.models.simulation import (
    AppElement,
    AppModel,
    AppScreen,
    ExplorationPolicy,
    PolicyKind,
    RenderConfig,
    Transition,
)
from xplore.services.graph_service import load_graph
from xplore.services.ingest_service import load_sequence as load_frames_sequence
from xplore.services.sequence_service import load_trace
from xplore.services.simulate_service import (
    event_frame,
    explore,
    generate_app_model,
    ground_truth_from_trace,
    gt_graph,
    load_app_model,
    render,
    save_app_model,
    screen_shades,
    simulate,
    validate_app_model,
)


@pytest.fixture
def two_screens() -> AppModel:
    def screen(index: int, target: str) -> AppScreen:
        return AppScreen(screen_id=f"s{index}", description=f"Screen {index}", elements=[
            AppElement(element_id=f"s{index}_btn0", bounds=(8, 40, 136, 68), text=f"Open {target}"),
        ])

    return AppModel(
        screens=[screen(0, "s1"), screen(1, "s0")],
        transitions=[
            Transition(screen="s0", element="s0_btn0", target="s1"),
            Transition(screen="s1", element="s1_btn0", target="s0"),
        ],
        home="s0",
    )


@pytest.fixture
def home_only() -> AppModel:
    return AppModel(
        screens=[AppScreen(screen_id="s0", description="Home", elements=[
            AppElement(element_id="s0_title", bounds=(0, 0, 144, 32), clickable=False, text="Home"),
        ])],
        home="s0",
    )


def described(events):
    return [(e.pre_screen, e.action.describe(), e.post_screen) for e in events]


# ============================================================================
# МОДЕЛЬ ПРИЛОЖЕНИЯ
# ============================================================================

class TestAppModel:
    def test_unreachable_screen(self, tiny_app):
        broken = tiny_app.model_copy(update={"transitions": tiny_app.transitions[:1]})
        with pytest.raises(InvalidAppModel) as exc_info:
            validate_app_model(broken)
        assert "s2" in exc_info.value.reason

    def test_unknown_element(self, tiny_app):
        transitions = [*tiny_app.transitions, Transition(screen="s1", element="s1_nope", target="s0")]
        with pytest.raises(InvalidAppModel):
            validate_app_model(tiny_app.model_copy(update={"transitions": transitions}))

    def test_back_to_itself(self, tiny_app):
        with pytest.raises(InvalidAppModel):
            validate_app_model(tiny_app.model_copy(update={"back_map": {"s1": "s1"}}))

    def test_file_round_trip(self, tiny_app, tmp_path):
        path = tmp_path / "appmodel.json"
        save_app_model(tiny_app, path)
        assert load_app_model(path) == tiny_app

    def test_file_against_schema(self, tmp_path):
        path = tmp_path / "appmodel.json"
        path.write_text(json.dumps({"screens": [], "home": "s0"}))
        with pytest.raises(InvalidAppModel):
            load_app_model(path)

    def test_generated_model_is_reproducible(self):
        first = generate_app_model(seed=7, n_screens=6)
        second = generate_app_model(seed=7, n_screens=6)

        assert first == second
        assert first.screen_ids == ["s0", "s1", "s2", "s3", "s4", "s5"]
        assert first.screens[0].description == "Home"
        assert validate_app_model(first) is first

    def test_generated_model_explores_fully(self):
        model = generate_app_model(seed=3, n_screens=5, max_elements=3)
        events = explore(model)

        exercised = {(e.pre_screen, e.action.target.resource_id) for e in events if e.action.target}
        assert exercised == set(model.transition_map())

    @pytest.mark.parametrize("kwargs", [{"n_screens": 0}, {"n_screens": 3, "max_elements": 7}])
    def test_generator_rejects_bad_arguments(self, kwargs):
        with pytest.raises(InvalidAppModel):
            generate_app_model(seed=0, **kwargs)


# ============================================================================
# ИССЛЕДОВАНИЕ
# ============================================================================

class TestExplore:
    def test_dfs_goes_back_for_pending_transitions(self, tiny_app):
        assert described(explore(tiny_app)) == [
            ("s0", "tap s0_btn0", "s1"),
            ("s1", "back", "s0"),
            ("s0", "tap s0_btn1", "s2"),
            ("s2", "tap s2_btn0", "s1"),
        ]

    def test_dfs_on_two_screens(self, two_screens):
        assert described(explore(two_screens)) == [
            ("s0", "tap s0_btn0", "s1"),
            ("s1", "tap s1_btn0", "s0"),
        ]

    def test_home_only(self, home_only):
        assert explore(home_only) == []

    def test_max_steps(self, tiny_app):
        assert len(explore(tiny_app, ExplorationPolicy(max_steps=2))) == 2

    def test_random_is_seeded(self, tiny_app):
        policy = ExplorationPolicy(kind=PolicyKind.random, seed=5, max_steps=12)
        first, second = explore(tiny_app, policy), explore(tiny_app, policy)

        assert len(first) == 12
        assert described(first) == described(second)
        for prev, nxt in zip(first, first[1:]):
            assert prev.post_screen == nxt.pre_screen

    def test_events_carry_full_vh(self, tiny_app):
        event = explore(tiny_app)[0]
        assert event.pre_vh.root.resource_id == "s0_root"
        assert [c.resource_id for c in event.post_vh.root.children] == ["s1_title"]


# ============================================================================
# ЭТАЛОННЫЙ ГРАФ
# ============================================================================

class TestGroundTruthGraph:
    def test_tiny_app(self, tiny_app):
        graph = gt_graph(tiny_app, explore(tiny_app))

        assert [n.description for n in graph.nodes] == ["Home", "Settings", "Profile"]
        assert [n.members for n in graph.nodes] == [[0, 2], [1, 4], [3]]
        assert sorted((e.src, e.dst, e.action.describe()) for e in graph.edges) == [
            (0, 1, "tap s0_btn0"), (0, 2, "tap s0_btn1"), (1, 0, "back"), (2, 1, "tap s2_btn0"),
        ]

    def test_two_screens_cover_both_transitions(self, two_screens):
        graph = gt_graph(two_screens, explore(two_screens))
        assert sorted((e.src, e.dst) for e in graph.edges) == [(0, 1), (1, 0)]

    def test_empty_trace(self, home_only):
        graph = gt_graph(home_only, [])

        assert graph.node_ids == [0]
        assert graph.edges == []
        assert graph.home == 0

    def test_repeated_event_merges(self, two_screens):
        events = explore(two_screens, ExplorationPolicy(kind=PolicyKind.random, max_steps=4))
        graph = gt_graph(two_screens, events)

        assert len(graph.edges) == 2
        assert sorted(e.occurrences for e in graph.edges) == [2, 2]

    def test_from_trace(self, tiny_app, tiny_corpus):
        gt = ground_truth_from_trace(tiny_app, load_trace(tiny_corpus.parent / "trace.jsonl"))
        assert described(gt.events) == described(explore(tiny_app))


# ============================================================================
# РЕНДЕРИНГ
# ============================================================================

class TestRender:
    def test_shades_are_distinct(self, tiny_app):
        assert screen_shades(tiny_app) == {"s0": 0, "s1": 8, "s2": 16}

    def test_single_event(self, two_screens):
        events = explore(two_screens, ExplorationPolicy(max_steps=1))
        corpus = render(two_screens, events)
        background = [int(luma.samples[200, 0]) for luma in corpus.frames.lumas]

        assert corpus.manifest.frame_count == 11
        assert [event.frame for event in corpus.trace] == [4]
        assert background == [0] * 4 + [4, 5, 7] + [8] * 4

    def test_elements_are_lifted(self, tiny_app):
        frame = render(tiny_app, []).frames.lumas[0].samples
        assert frame.shape == (256, 144)
        assert frame[10, 10] == 2
        assert frame[50, 20] == 2
        assert frame[200, 20] == 0

    def test_frame_count_and_event_frames(self, tiny_app):
        corpus = render(tiny_app, explore(tiny_app))
        assert corpus.manifest.frame_count == 4 * 7 + 4
        assert [event.frame for event in corpus.trace] == [4, 11, 18, 25]
        assert event_frame(2, RenderConfig()) == 18

    def test_custom_config(self, two_screens):
        cfg = RenderConfig(width=20, height=60, static_run=5, transition_run=2, fps=5.0)
        corpus = render(two_screens, explore(two_screens), cfg)

        assert corpus.manifest.frame_count == 2 * 7 + 5
        assert (corpus.manifest.width, corpus.manifest.height, corpus.manifest.fps) == (20, 60, 5.0)
        assert corpus.trace[1].frame == 12

    def test_deterministic(self, tiny_app):
        first = simulate(tiny_app)[1].frames
        second = simulate(tiny_app)[1].frames
        assert first.lumas == second.lumas


class TestCorpus:
    def test_files(self, tiny_corpus, tiny_app):
        root = tiny_corpus.parent
        frames = load_frames_sequence(tiny_corpus)

        assert frames.manifest.frame_count == 32
        assert len(list((root / "frames").glob("*.png"))) == 32
        assert load_app_model(root / "appmodel.json") == tiny_app
        assert len(load_trace(root / "trace.jsonl")) == 4
        assert load_graph(root / "gt_graph.json").home == 0
