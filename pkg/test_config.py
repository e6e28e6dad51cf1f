"""
test_config.py

Settings defaults, validation and the environment < file < flags precedence.
"""

import pytest

from irdpg.config import Settings, load_settings, read_config_file


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for name in Settings.model_fields:
        monkeypatch.delenv(f"IRDPG_{name.upper()}", raising=False)


def test_defaults():
    settings = load_settings()
    assert settings.n == 2000
    assert settings.seeds == [0, 1, 2, 3, 4]
    assert settings.dims == [1, 2, 3, 5, 10]
    assert settings.edge_list is None
    assert not settings.full_scale


def test_environment_overrides_defaults(monkeypatch):
    monkeypatch.setenv("IRDPG_N", "500")
    monkeypatch.setenv("IRDPG_FULL_SCALE", "true")
    settings = load_settings()
    assert settings.n == 500
    assert settings.full_scale


def test_file_overrides_environment_and_flags_override_file(tmp_path, monkeypatch):
    monkeypatch.setenv("IRDPG_N", "500")
    monkeypatch.setenv("IRDPG_SEED", "9")
    path = tmp_path / "run.env"
    path.write_text("# desk run\nN=800\nIRDPG_EXAMPLE=Ex2\nseeds=1, 2 3\nLOG_LEVEL=debug\nEDGE_LIST=\n")
    settings = load_settings(str(path))
    assert settings.n == 800
    assert settings.seed == 9
    assert settings.example == "Ex2"
    assert settings.seeds == [1, 2, 3]
    assert settings.log_level == "DEBUG"
    assert settings.edge_list is None

    settings = load_settings(str(path), {"n": 1200, "example": None})
    assert settings.n == 1200
    assert settings.example == "Ex2"


def test_unknown_key_and_missing_file(tmp_path):
    path = tmp_path / "bad.env"
    path.write_text("NODES=10\n")
    with pytest.raises(ValueError, match="NODES"):
        read_config_file(str(path))
    with pytest.raises(FileNotFoundError):
        load_settings(str(tmp_path / "absent.env"))


@pytest.mark.parametrize("field, value", [
    ("n", 2),
    ("threads", 0),
    ("log_level", "chatty"),
    ("dims", "1,x"),
    ("k", -5),
])
def test_invalid_values_rejected(field, value):
    with pytest.raises(ValueError):
        load_settings(overrides={field: value})


def test_settings_are_frozen():
    settings = load_settings()
    with pytest.raises(ValueError):
        settings.n = 10
