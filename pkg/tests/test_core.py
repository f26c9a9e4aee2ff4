import json
import logging

import pytest
from pydantic import ValidationError as PydanticValidationError

from app.core.config import Settings
from app.core.exceptions import (
    EstimationError,
    OutputError,
    ValidationError,
    from_pydantic,
    handle_exception,
)
from app.core.logging import JSONFormatter, setup_logging
from app.schemas.array import ArrayConfig


def test_settings_defaults():
    settings = Settings(_env_file=None)
    assert settings.REGION_HIGH_DB > settings.REGION_LOW_DB
    assert settings.ANGLE_GRID_POINTS == 4096


def test_settings_env_override(monkeypatch):
    monkeypatch.setenv("MBAA_DEFAULT_SEED", "17")
    assert Settings(_env_file=None).DEFAULT_SEED == 17


def test_json_formatter_copies_extras():
    record = logging.LogRecord("mbaa", logging.INFO, __file__, 1, "ran %s", ("aoa",), None)
    record.seed = 3
    record.unrelated = "dropped"
    data = json.loads(JSONFormatter().format(record))
    assert data["message"] == "ran aoa"
    assert data["seed"] == 3
    assert "unrelated" not in data


def test_setup_logging_replaces_handlers():
    logger = setup_logging()
    setup_logging(debug=True)
    assert len(logger.handlers) == 1
    assert logger.level == logging.DEBUG


class TestExitCodes:
    def test_validation_error(self):
        assert handle_exception(ValidationError("bad")) == 2

    def test_runtime_errors(self):
        assert handle_exception(EstimationError()) == 1
        assert handle_exception(OutputError("x.csv", "denied")) == 1
        assert handle_exception(PermissionError("denied")) == 1
        assert handle_exception(RuntimeError("boom")) == 1

    def test_pydantic_error(self):
        with pytest.raises(PydanticValidationError) as info:
            ArrayConfig(n_beams=1)
        assert handle_exception(info.value) == 2
        assert "n_beams" in from_pydantic(info.value).message
