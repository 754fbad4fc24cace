import pytest

from libs.vare.settings import get_settings


@pytest.fixture
def fresh_settings():
    get_settings.cache_clear()
    yield get_settings
    get_settings.cache_clear()


def test_defaults(fresh_settings, monkeypatch):
    for name in ("VARE_WORKERS", "VARE_ETA_RESOLUTION", "VARE_LGCP_GRID", "VARE_CONDITION_LIMIT"):
        monkeypatch.delenv(name, raising=False)
    s = fresh_settings()
    assert s.workers == 1 and s.eta_resolution == 61 and s.lgcp_grid == 64
    assert s.condition_limit == 1e12


def test_environment_overrides(fresh_settings, monkeypatch):
    monkeypatch.setenv("VARE_WORKERS", "3")
    monkeypatch.setenv("VARE_THOMAS_DILATION", "5")
    monkeypatch.setenv("VARE_LOG_LEVEL", "debug")
    s = fresh_settings()
    assert s.workers == 3 and s.thomas_dilation == 5.0 and s.log_level == "DEBUG"


def test_bad_values_fall_back(fresh_settings, monkeypatch):
    monkeypatch.setenv("VARE_ETA_RESOLUTION", "fine")
    monkeypatch.setenv("VARE_CONDITION_LIMIT", "big")
    s = fresh_settings()
    assert s.eta_resolution == 61 and s.condition_limit == 1e12
