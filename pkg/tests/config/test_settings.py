import json
from pathlib import Path

import pytest
from pydantic import ValidationError

from acee.config import Settings, load_settings, validate_configuration


@pytest.fixture(autouse=True)
def _isolated(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("HOME", str(tmp_path))
    for name in ("ACEE_WORKERS", "ACEE_LOG_LEVEL", "ACEE_SAMPLER_STEPS"):
        monkeypatch.delenv(name, raising=False)


def test_defaults():
    settings = Settings()
    assert settings.mc_draws == 100
    assert settings.sampler_steps == 100
    assert settings.tau_min == pytest.approx(1e-3)
    assert settings.log_format == "text"
    assert validate_configuration(settings) == []


def test_environment_overrides(monkeypatch: pytest.MonkeyPatch):
    monkeypatch.setenv("ACEE_WORKERS", "4")
    monkeypatch.setenv("ACEE_SAMPLER_STEPS", "25")
    settings = load_settings()
    assert settings.workers == 4
    assert settings.sampler_steps == 25


def test_json_file(tmp_path: Path):
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"mc_draws": 7, "log_format": "json"}))
    settings = load_settings(path)
    assert settings.mc_draws == 7
    assert settings.log_config["handlers"]["default"]["formatter"] == "json"


def test_env_file(tmp_path: Path):
    path = tmp_path / "custom.env"
    path.write_text("ACEE_DEFAULT_SEED=11\n")
    assert load_settings(path).default_seed == 11


def test_unknown_and_invalid_fields_are_rejected():
    with pytest.raises(ValidationError):
        Settings(workers=0)
    with pytest.raises(ValidationError):
        Settings(server_port=8000)


def test_validation_issues(tmp_path: Path):
    blocker = tmp_path / "not-a-dir"
    blocker.write_text("")
    issues = validate_configuration(
        Settings(log_level="LOUD", tau_min=2.0, tau_max=1.0, output_dir=blocker)
    )
    assert len(issues) == 3
    assert any("LOG_LEVEL" in issue for issue in issues)
    assert any("TAU_MIN" in issue for issue in issues)
