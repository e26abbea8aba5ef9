from pathlib import Path

import pytest
import yaml

from rrgraph.settings import Settings


def test_defaults_when_file_missing(tmp_path):
    settings = Settings.load(str(tmp_path / "missing.yaml"))
    assert settings.limits.explicit_n == 8
    assert settings.sampling.cutoff_exponent == 4
    assert settings.runtime.threads == -1


def test_load_yaml(tmp_path):
    path = tmp_path / "settings.yaml"
    path.write_text(yaml.safe_dump({"limits": {"explicit_n": 7}, "monitoring": {"log_level": "DEBUG"}}))
    settings = Settings.load(str(path))
    assert settings.limits.explicit_n == 7
    assert settings.limits.lazy_n == 16
    assert settings.monitoring.log_level == "DEBUG"


def test_environment_variable(tmp_path, monkeypatch):
    path = tmp_path / "env.yaml"
    path.write_text(yaml.safe_dump({"sampling": {"default_trials": 3}}))
    monkeypatch.setenv("RRG_SETTINGS", str(path))
    assert Settings.load().sampling.default_trials == 3


def test_repository_config_matches_defaults():
    assert Settings.load(str(Path(__file__).parent.parent / "config" / "settings.yaml")) == Settings()


def test_overrides_cast_to_field_type():
    settings = Settings().apply_overrides({
        "limits.explicit_n": "7",
        "sampling.tolerance": "1e-9",
        "monitoring.enable_metrics": "false",
    })
    assert settings.limits.explicit_n == 7
    assert settings.sampling.tolerance == 1e-9
    assert settings.monitoring.enable_metrics is False


@pytest.mark.parametrize("key", ["limits.nope", "nosection.key", "limits"])
def test_unknown_override(key):
    with pytest.raises(KeyError):
        Settings().apply_overrides({key: "1"})


def test_cutoff_rule():
    settings = Settings()
    assert settings.cutoff_for(10) == 10_000
    settings.sampling.cutoff_exponent = 3
    assert settings.cutoff_for(10) == 1000


def test_ensure_directories(tmp_path):
    settings = Settings()
    for name in ("output_dir", "logs_dir", "manifests_dir", "traces_dir"):
        setattr(settings.paths, name, str(tmp_path / name))
    settings.paths.metrics_file = str(tmp_path / "metrics" / "rrg.prom")
    settings.ensure_directories()
    assert (tmp_path / "manifests_dir").is_dir()
    assert (tmp_path / "metrics").is_dir()
