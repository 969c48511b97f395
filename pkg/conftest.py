import pytest

from config import get_settings


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: Monte Carlo or profile-building test (deselect with -m 'not slow')")


@pytest.fixture
def fresh_settings(monkeypatch):
    """Re-reads Settings from the environment; restores the cached copy afterwards."""
    get_settings.cache_clear()
    yield monkeypatch
    get_settings.cache_clear()
