"""
Тесты оркестрации пайплайна: конфигурация, стадии, кэш артефактов, отчет.
"""
import json

import pytest

from xplore.exceptions import InvalidConfig, StageFailed
from xplore.services import pipeline_service
from xplore.models.clusters import ClusterMethod
from xplore.models.inference import BackendChoice
from xplore.models.pipeline import ClusterSettings, PipelineConfig, QaSettings, StageStatus
from xplore.services.artifact_service import ArtifactStore
from xplore.services.model_client_service import MockBackend, ModelClient
from xplore.services.pipeline_service import (
    artifact_tree,
    load_pipeline_config,
    load_report,
    run_pipeline,
    stages_in_order,
)

GRAPH_STAGES = ["ingest", "keyframe", "sequence", "cluster", "graph"]


@pytest.fixture
def config(tiny_corpus, tmp_path) -> PipelineConfig:
    return PipelineConfig(
        manifest=tiny_corpus,
        trace=tiny_corpus.parent / "trace.jsonl",
        out_dir=tmp_path / "out",
    )


class RemoteLikeBackend(MockBackend):
    """Отвечает как mock, но представляется другим сервером."""

    @property
    def identity(self) -> str:
        return "remote:http://model.test"


def client() -> ModelClient:
    return ModelClient(backend=MockBackend())


# ============================================================================
# КОНФИГУРАЦИЯ
# ============================================================================

class TestConfig:
    def test_paths_relative_to_file(self, tmp_path):
        path = tmp_path / "pipeline.toml"
        path.write_text(
            'manifest = "corpus/manifest.json"\n'
            'out_dir = "out"\n'
            "prompt_budget = 500\n"
            "[cluster]\n"
            'method = "none"\n'
            "[qa]\n"
            "enabled = true\n"
            'items = "qa.jsonl"\n'
        )
        cfg = load_pipeline_config(path)

        assert cfg.manifest == tmp_path / "corpus" / "manifest.json"
        assert cfg.out_dir == tmp_path / "out"
        assert cfg.qa.items == tmp_path / "qa.jsonl"
        assert cfg.cluster.method == ClusterMethod.none
        assert cfg.prompt_budget == 500
        assert cfg.trace is None

    def test_overrides_skip_none(self, tmp_path):
        path = tmp_path / "pipeline.toml"
        path.write_text('manifest = "/data/manifest.json"\nseed = 1\n')
        cfg = load_pipeline_config(path, {"seed": 3, "backend": None})

        assert cfg.seed == 3
        assert cfg.backend == BackendChoice.auto
        assert str(cfg.manifest) == "/data/manifest.json"

    def test_missing_file(self, tmp_path):
        with pytest.raises(InvalidConfig) as exc_info:
            load_pipeline_config(tmp_path / "nope.toml")
        assert exc_info.value.exit_code == 1

    def test_not_toml(self, tmp_path):
        path = tmp_path / "pipeline.toml"
        path.write_text("manifest = \n")
        with pytest.raises(InvalidConfig):
            load_pipeline_config(path)

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "pipeline.toml"
        path.write_text('manifest = "m.json"\nthreshold = 3\n')
        with pytest.raises(InvalidConfig) as exc_info:
            load_pipeline_config(path)
        assert "threshold" in exc_info.value.reason

    def test_stage_order(self):
        assert stages_in_order(["qa", "graph", "ingest"]) == ["ingest", "graph", "qa"]


# ============================================================================
# ЗАПУСК
# ============================================================================

class TestRun:
    @pytest.mark.asyncio
    async def test_first_run(self, config):
        report = await run_pipeline(config, client())

        assert report.ran_stages == GRAPH_STAGES
        assert report.source_id == "TinyApp"
        assert report.backend == "mock"
        assert report.stage("ingest").counts == {"frames": 32}
        assert report.stage("keyframe").counts == {"segments": 4, "keyframes": 8}
        assert report.stage("sequence").counts == {"steps": 4, "generated_actions": 0}
        assert report.stage("cluster").counts == {"screens": 8, "nodes": 3}
        assert report.stage("graph").counts == {"nodes": 3, "edges": 4}

        assert sorted(artifact_tree(config.out_dir)) == [
            "clusters.json", "graph.dot", "graph.json", "ingest.json", "keyframes.json", "sequence.json",
        ]
        assert load_report(config.out_dir).stages == report.stages

    @pytest.mark.asyncio
    async def test_second_run_is_cached(self, config):
        await run_pipeline(config, client())
        before = artifact_tree(config.out_dir)

        report = await run_pipeline(config, client())

        assert report.ran_stages == []
        assert all(stage.status == StageStatus.cached for stage in report.stages)
        assert artifact_tree(config.out_dir) == before

    @pytest.mark.asyncio
    async def test_cached_run_skips_clustering(self, config, mocker):
        spy = mocker.spy(pipeline_service, "cluster_rule")

        await run_pipeline(config, client())
        await run_pipeline(config, client())

        assert spy.call_count == 1

    @pytest.mark.asyncio
    async def test_edited_artifact_reruns_stage(self, config):
        await run_pipeline(config, client())
        before = artifact_tree(config.out_dir)
        (config.out_dir / "artifacts" / "graph.json").write_text("{}")

        report = await run_pipeline(config, client())

        assert report.ran_stages == ["graph"]
        assert artifact_tree(config.out_dir) == before

    @pytest.mark.asyncio
    async def test_changed_config_reruns_downstream(self, config):
        await run_pipeline(config, client())
        changed = config.model_copy(update={"cluster": ClusterSettings(method=ClusterMethod.none)})

        report = await run_pipeline(changed, client())

        assert report.ran_stages == ["cluster", "graph"]
        assert report.stage("graph").counts["nodes"] == 8

    @pytest.mark.asyncio
    async def test_model_clustering_with_oracle_labels(self, config):
        cluster = ClusterSettings(method=ClusterMethod.model, oracle_labels=True)
        report = await run_pipeline(config.model_copy(update={"cluster": cluster}), client())

        assert report.stage("cluster").counts["nodes"] == 3
        assert report.tokens["cluster_decide"].calls > 0

    @pytest.mark.asyncio
    async def test_other_backend_reruns_model_stages(self, config):
        await run_pipeline(config, client())

        report = await run_pipeline(config, ModelClient(backend=RemoteLikeBackend()))

        assert report.backend == "mock"
        assert report.ran_stages == ["sequence", "cluster", "graph"]

    @pytest.mark.asyncio
    async def test_replay_keeps_recorded_backend(self, config, tmp_path):
        cache = tmp_path / "cache"
        await run_pipeline(config, ModelClient(backend=MockBackend(), cache_dir=cache))

        report = await run_pipeline(config, ModelClient(backend=None, cache_dir=cache))

        assert report.backend == "replay"
        assert report.ran_stages == []

    @pytest.mark.asyncio
    async def test_edited_prompts_rerun_model_clustering(self, config, mocker):
        cluster = ClusterSettings(method=ClusterMethod.model, oracle_labels=True)
        with_model = config.model_copy(update={"cluster": cluster})
        await run_pipeline(with_model, client())

        mocker.patch.object(pipeline_service, "templates_digest", return_value="0" * 64)
        report = await run_pipeline(with_model, client())

        assert report.ran_stages == ["cluster", "graph"]

    @pytest.mark.asyncio
    async def test_runs_are_recorded(self, config):
        await run_pipeline(config, client())
        await run_pipeline(config, client())

        with ArtifactStore(config.out_dir) as store:
            runs = store.runs()
            assert [run.ran_stages for run in runs] == [",".join(GRAPH_STAGES), ""]
            assert store.stages() == GRAPH_STAGES


class TestFailures:
    @pytest.mark.asyncio
    async def test_missing_manifest(self, config, tmp_path):
        broken = config.model_copy(update={"manifest": tmp_path / "nope.json"})
        with pytest.raises(StageFailed) as exc_info:
            await run_pipeline(broken, client())
        assert exc_info.value.stage == "ingest"
        assert exc_info.value.exit_code == 1

        report = load_report(config.out_dir)
        assert report.stages == []
        with ArtifactStore(config.out_dir) as store:
            assert "ingest" in store.runs()[0].error

    @pytest.mark.asyncio
    async def test_backend_failure_keeps_earlier_artifacts(self, config):
        no_trace = config.model_copy(update={"trace": None})
        with pytest.raises(StageFailed) as exc_info:
            await run_pipeline(no_trace, ModelClient())

        assert exc_info.value.stage == "sequence"
        assert exc_info.value.exit_code == 2
        assert sorted(artifact_tree(config.out_dir)) == ["ingest.json", "keyframes.json"]
        report = load_report(config.out_dir)
        assert [stage.name for stage in report.stages] == ["ingest", "keyframe"]

        with ArtifactStore(config.out_dir) as store:
            assert store.runs()[0].error is not None


# ============================================================================
# СТАДИЯ QA
# ============================================================================

class TestQaStage:
    @pytest.mark.asyncio
    async def test_generated_questions(self, config, tiny_corpus):
        qa = QaSettings(enabled=True, app_model=tiny_corpus.parent / "appmodel.json")
        report = await run_pipeline(config.model_copy(update={"qa": qa}), client())

        assert report.ran_stages == GRAPH_STAGES + ["qa"]
        # overview 1 + page_analysis 2 + usage 2 + action_recall 2; seq_verify без материала
        assert report.stage("qa").counts["items"] == 7
        assert any("seq_verify" in warning for warning in report.warnings)

        metrics = json.loads((config.out_dir / "artifacts" / "metrics.json").read_text())
        assert metrics["total"] == 7
        assert report.tokens["qa_answer"].calls == 7

    @pytest.mark.asyncio
    async def test_questions_from_file_are_cached(self, config, tmp_path):
        items = tmp_path / "qa.jsonl"
        items.write_text(json.dumps({
            "task": "overview", "question": "What is it?", "options": ["a", "b", "c", "d", "e"],
            "gt": 0, "source_id": "TinyApp",
        }) + "\n")
        with_qa = config.model_copy(update={"qa": QaSettings(enabled=True, items=items)})

        first = await run_pipeline(with_qa, client())
        second = await run_pipeline(with_qa, client())

        # mock-бэкенд всегда отвечает "A"
        assert first.stage("qa").counts == {"items": 1, "correct": 1}
        assert second.stage("qa").status == StageStatus.cached
        assert second.stage("qa").counts == {"items": 1, "correct": 1}

    @pytest.mark.asyncio
    async def test_needs_questions(self, config):
        with pytest.raises(StageFailed) as exc_info:
            await run_pipeline(config.model_copy(update={"qa": QaSettings(enabled=True)}), client())
        assert exc_info.value.stage == "qa"
