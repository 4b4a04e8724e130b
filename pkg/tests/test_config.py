"""
Тесты настроек окружения и логирования.
"""
import logging
from logging.handlers import RotatingFileHandler

import pytest

from xplore import config
from xplore.config import Settings, validate_settings
from xplore.utils.logger import get_logger, log_stage_timing, setup_logging


def make_settings(tmp_path, **overrides) -> Settings:
    values = {
        "APP_ENV": "production",
        "LOG_LEVEL": "INFO",
        "TIMEZONE": "UTC",
        "XPLORE_MODEL_URL": None,
        "XPLORE_CACHE_DIR": str(tmp_path / "cache"),
    }
    values.update(overrides)
    return Settings(_env_file=None, **values)


class TestSettings:
    def test_valid(self, tmp_path):
        assert validate_settings(make_settings(tmp_path)) == (True, [])

    @pytest.mark.parametrize("overrides,fragment", [
        ({"APP_ENV": "qa"}, "APP_ENV"),
        ({"LOG_LEVEL": "LOUD"}, "LOG_LEVEL"),
        ({"TIMEZONE": "Mars/Olympus"}, "TIMEZONE"),
        ({"XPLORE_MODEL_URL": "localhost:8000"}, "XPLORE_MODEL_URL"),
    ])
    def test_invalid(self, tmp_path, overrides, fragment):
        is_valid, errors = validate_settings(make_settings(tmp_path, **overrides))
        assert not is_valid
        assert any(fragment in error for error in errors)

    def test_cache_dir_is_a_file(self, tmp_path):
        blocker = tmp_path / "cache"
        blocker.write_text("")
        assert not validate_settings(make_settings(tmp_path))[0]

    def test_reload_reads_environment(self, monkeypatch):
        monkeypatch.setenv("PROMPT_BUDGET", "123")
        try:
            assert config.reload_settings().PROMPT_BUDGET == 123
            assert config.get_settings().PROMPT_BUDGET == 123
        finally:
            monkeypatch.delenv("PROMPT_BUDGET")
            config.reload_settings()


class TestLogging:
    def test_namespace(self):
        assert get_logger("graph_service").name == "xplore.graph_service"
        assert get_logger("xplore").name == "xplore"
        assert get_logger("xplore.cli").name == "xplore.cli"

    def test_stage_timing_sync(self, caplog):
        caplog.set_level(logging.DEBUG, logger="xplore")

        @log_stage_timing(get_logger("timing_test"), "double")
        def double(x):
            return 2 * x

        assert double(4) == 8
        assert double.__name__ == "double"
        messages = [record.getMessage() for record in caplog.records]
        assert "🔵 Старт: double" in messages
        assert any(message.startswith("🟢 double | ") for message in messages)

    @pytest.mark.asyncio
    async def test_stage_timing_async(self, caplog):
        caplog.set_level(logging.DEBUG, logger="xplore")

        @log_stage_timing(get_logger("timing_test"), "fetch")
        async def fetch():
            raise RuntimeError("down")

        with pytest.raises(RuntimeError):
            await fetch()
        assert any(record.getMessage().startswith("🟢 fetch | ") for record in caplog.records)

    def test_file_handlers(self, tmp_path):
        root = logging.getLogger()
        try:
            setup_logging(log_level="DEBUG", log_dir=str(tmp_path), enable_file_logging=True,
                          enable_console_logging=False)
            get_logger("file_test").error("broken frame")
            for handler in root.handlers:
                handler.flush()

            assert "broken frame" in (tmp_path / "xplore.log").read_text(encoding="utf-8")
            assert "broken frame" in (tmp_path / "error.log").read_text(encoding="utf-8")
        finally:
            for handler in list(root.handlers):
                if isinstance(handler, RotatingFileHandler):
                    root.removeHandler(handler)
                    handler.close()
