"""
Тесты кластеризации экранов: правиловая, моделью, без кластеризации, качество.
"""
import numpy as np
import pytest
import pytest_asyncio

from xplore.exceptions import ClientUnavailable, ClusterError, UniverseMismatch
from xplore.models.clusters import ClusterAssignment, ClusterMethod, RuleClusterConfig, ScreenNode
from xplore.models.frames import LumaPlane
from xplore.models.inference import Endpoint
from xplore.models.sequence import ScreenRecord
from xplore.models.vh import RecordSource, SimplifiedVh, ViewHierarchy, VhNode
from xplore.services.cluster_service import (
    assignment_quality,
    cluster_model,
    cluster_none,
    cluster_rule,
    describe_screen,
    load_clusters,
    partition_from_labels,
    save_clusters,
)
from xplore.services.ingest_service import load_sequence as load_frames_sequence
from xplore.services.keyframe_service import detect_keyframes
from xplore.services.model_client_service import MockBackend, MockPattern, ModelClient
from xplore.services.sequence_service import build_sequence, load_trace, screens_from_sequence
from xplore.services.vh_service import simplify, vh_similarity
from xplore.utils.calculations import rand_index


@pytest_asyncio.fixture
async def screens(tiny_corpus):
    frames = load_frames_sequence(tiny_corpus)
    trace = load_trace(tiny_corpus.parent / "trace.jsonl")
    seq = await build_sequence(frames, detect_keyframes(frames).segments, trace)
    return screens_from_sequence(seq)


def members(assignment):
    return [node.members for node in assignment.nodes]


def record(index, lines, label=None):
    return ScreenRecord(
        keyframe_index=index, vh=SimplifiedVh(tuple(lines)), vh_source=RecordSource.generated, label=label,
    )


class TestRule:
    @pytest.mark.asyncio
    async def test_recovers_screens(self, screens):
        result = cluster_rule(screens)

        assert result.method == ClusterMethod.rule
        assert members(result) == [[2, 14, 16], [7, 9, 28], [21, 23]]
        assert result.nodes[0].description == "Open Settings, Open Profile"
        assert result.nodes[1].description == "Screen 1"
        assert assignment_quality(result, partition_from_labels(screens)).exact

    @pytest.mark.asyncio
    async def test_zero_thresholds_merge_everything(self, screens):
        result = cluster_rule(screens, RuleClusterConfig(tau_vh=0.0, tau_img=0.0))
        assert len(result.nodes) == 1
        assert result.nodes[0].representative == 2

    def test_requires_luma(self):
        with pytest.raises(ClusterError):
            cluster_rule([record(0, ["0|A|||false"])])

    @pytest.mark.asyncio
    async def test_duplicate_keyframes(self, screens):
        with pytest.raises(ClusterError):
            cluster_rule([screens[0], screens[0]])

    def test_vh_compared_after_simplification(self):
        button = VhNode(class_name="Button", resource_id="ok", text="OK", bounds=(0, 0, 8, 8), clickable=True)
        flat = ViewHierarchy(screen=(8, 8), root=VhNode(class_name="Frame", bounds=(0, 0, 8, 8), children=(button,)))
        wrapper = VhNode(class_name="Frame", bounds=(0, 0, 8, 8), children=(button,))
        wrapped = ViewHierarchy(screen=(8, 8), root=VhNode(class_name="Frame", bounds=(0, 0, 8, 8), children=(wrapper,)))
        luma = LumaPlane.from_array(np.zeros((8, 8), dtype=np.uint8))
        screens = [
            ScreenRecord(keyframe_index=i, vh=simplify(vh), vh_source=RecordSource.ground_truth, luma=luma)
            for i, vh in enumerate([flat, wrapped])
        ]

        assert vh_similarity(flat, wrapped) < 0.8
        assert len(cluster_rule(screens, RuleClusterConfig(tau_vh=0.8)).nodes) == 1


class TestModel:
    @pytest.mark.asyncio
    async def test_oracle_labels(self, screens, mock_client):
        result = await cluster_model(screens, mock_client, oracle_labels=True)

        assert result.method == ClusterMethod.model
        assert [node.description for node in result.nodes] == ["s0", "s1", "s2"]
        assert members(result) == [[2, 14, 16], [7, 9, 28], [21, 23]]

    @pytest.mark.asyncio
    async def test_blind_mock_creates_node_per_screen(self, screens, mock_client):
        result = await cluster_model(screens, mock_client)
        assert len(result.nodes) == len(screens)

    @pytest.mark.asyncio
    async def test_unknown_match_creates_node(self):
        pattern = MockPattern(endpoint=Endpoint.cluster_decide, match={"nodes": []}, body={"match": 7})
        client = ModelClient(backend=MockBackend(patterns=[pattern]))
        result = await cluster_model([record(0, ["0|Button|ok|OK|true"])], client)

        assert result.nodes[0].description == "OK"

    @pytest.mark.asyncio
    async def test_replay_without_cache(self, screens):
        with pytest.raises(ClientUnavailable):
            await cluster_model(screens, ModelClient())


class TestNone:
    @pytest.mark.asyncio
    async def test_one_node_per_keyframe(self, screens):
        result = cluster_none(screens)

        assert result.method == ClusterMethod.none
        assert members(result) == [[s.keyframe_index] for s in screens]


class TestQuality:
    def test_rand_index_by_hand(self):
        assert rand_index({1: "a", 2: "a", 3: "b"}, {1: "x", 2: "y", 3: "y"}) == pytest.approx(1 / 3)

    def test_relabeled_partition_is_exact(self):
        pred = cluster_none([record(0, []), record(1, [])])
        quality = assignment_quality(pred, {0: "u", 1: "v"})

        assert quality.exact
        assert quality.rand_index == 1.0

    def test_universe_mismatch(self):
        pred = cluster_none([record(0, []), record(1, [])])
        with pytest.raises(UniverseMismatch) as exc_info:
            assignment_quality(pred, {0: "u", 2: "v"})
        assert exc_info.value.only_pred == [1]
        assert exc_info.value.only_gt == [2]

    def test_partition_needs_labels(self):
        with pytest.raises(ClusterError):
            partition_from_labels([record(0, [])])

    def test_describe_screen_fallback(self):
        assert describe_screen(record(0, ["0|TextView|t|Title|false"]), 4) == "Screen 4"


class TestPersistence:
    def test_round_trip(self, tmp_path):
        assignment = ClusterAssignment(
            method=ClusterMethod.rule,
            nodes=[
                ScreenNode(node_id=0, description="Home", representative=2, members=[2, 14]),
                ScreenNode(node_id=1, description="Settings", representative=7, members=[7]),
            ],
            assignment={2: 0, 14: 0, 7: 1},
        )
        path = tmp_path / "clusters.json"
        save_clusters(assignment, path)

        assert load_clusters(path) == assignment

    def test_inconsistent_assignment_rejected(self):
        with pytest.raises(ValueError):
            ClusterAssignment(
                method=ClusterMethod.rule,
                nodes=[ScreenNode(node_id=0, description="Home", representative=2, members=[2])],
                assignment={2: 0, 3: 0},
            )
