"""
Тесты индекса артефактов (SQLite).
"""
import pytest

from xplore.database import RunStatus
from xplore.services.artifact_service import ArtifactStore


@pytest.fixture
def store(tmp_path):
    with ArtifactStore(tmp_path / "out") as store:
        yield store


def write(store, name, text):
    store.path(name).write_text(text)


class TestStages:
    def test_layout(self, store, tmp_path):
        assert store.artifacts_dir == tmp_path / "out" / "artifacts"
        assert store.artifacts_dir.is_dir()
        assert (tmp_path / "out" / "index.db").is_file()

    def test_fresh_after_commit(self, store):
        write(store, "graph.json", "{}")
        content = store.commit("graph", "inputs-1", ["graph.json"])

        assert store.recorded_hash("graph") == content
        assert store.is_fresh("graph", "inputs-1", ["graph.json"])
        assert store.stages() == ["graph"]

    def test_unknown_stage_is_stale(self, store):
        assert not store.is_fresh("graph", "inputs-1", ["graph.json"])
        assert store.recorded_hash("graph") is None

    def test_changed_inputs(self, store):
        write(store, "graph.json", "{}")
        store.commit("graph", "inputs-1", ["graph.json"])
        assert not store.is_fresh("graph", "inputs-2", ["graph.json"])

    def test_edited_artifact(self, store):
        write(store, "graph.json", "{}")
        store.commit("graph", "inputs-1", ["graph.json"])
        write(store, "graph.json", '{"edited": true}')

        assert not store.is_fresh("graph", "inputs-1", ["graph.json"])

    def test_deleted_artifact(self, store):
        write(store, "graph.json", "{}")
        store.commit("graph", "inputs-1", ["graph.json"])
        store.path("graph.json").unlink()

        assert not store.is_fresh("graph", "inputs-1", ["graph.json"])
        assert store.content_hash(["graph.json"]) is None

    def test_recommit_overwrites(self, store):
        write(store, "graph.json", "{}")
        store.commit("graph", "inputs-1", ["graph.json"])
        write(store, "graph.dot", "digraph {}")
        store.commit("graph", "inputs-2", ["graph.json", "graph.dot"])

        assert store.stages() == ["graph"]
        assert store.is_fresh("graph", "inputs-2", ["graph.json", "graph.dot"])
        assert not store.is_fresh("graph", "inputs-2", ["graph.json"])

    def test_commit_requires_files(self, store):
        with pytest.raises(FileNotFoundError):
            store.commit("graph", "inputs-1", ["graph.json"])

    def test_invalidate(self, store):
        write(store, "graph.json", "{}")
        store.commit("graph", "inputs-1", ["graph.json"])
        store.invalidate("graph")

        assert store.stages() == []
        store.invalidate("graph")

    def test_content_hash_depends_on_names(self, store):
        write(store, "a.json", "{}")
        write(store, "b.json", "{}")
        assert store.content_hash(["a.json"]) != store.content_hash(["b.json"])

    def test_index_survives_reopen(self, tmp_path):
        with ArtifactStore(tmp_path / "out") as first:
            write(first, "graph.json", "{}")
            first.commit("graph", "inputs-1", ["graph.json"])
        with ArtifactStore(tmp_path / "out") as second:
            assert second.is_fresh("graph", "inputs-1", ["graph.json"])


class TestRuns:
    def test_completed_run(self, store):
        run_id = store.start_run("rec", seed=0, backend="mock")
        store.finish_run(run_id, ["ingest", "keyframe"])

        run = store.runs()[0]
        assert run.status == RunStatus.completed
        assert run.ran_stages == "ingest,keyframe"
        assert run.finished_at is not None

    def test_failed_run(self, store):
        run_id = store.start_run("rec", seed=1, backend="replay")
        store.finish_run(run_id, ["ingest"], error="stage keyframe failed")

        run = store.runs()[0]
        assert run.status == RunStatus.failed
        assert run.error == "stage keyframe failed"

    def test_unknown_run_is_ignored(self, store):
        store.finish_run(42, [])
        assert store.runs() == []

    def test_last_model_identity_skips_replay(self, store):
        assert store.last_model_identity() is None
        store.start_run("rec", seed=0, backend="remote", model_identity="remote:http://model.test")
        store.start_run("rec", seed=0, backend="replay")

        assert store.last_model_identity() == "remote:http://model.test"
