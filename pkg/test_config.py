import logging

import pytest

from config import Settings, get_logger, get_settings
from errors import ConfigError, NumericalError, SBMError


def test_defaults_when_environment_is_empty(fresh_settings):
    for name in ("SBM_WORKERS", "SBM_BLOCK_SIZE", "SBM_STEHFEST_DEGREE", "SBM_RATIO_MAX_SPREAD"):
        fresh_settings.delenv(name, raising=False)
    s = get_settings()
    assert s.workers == 1
    assert s.block_size == 4096
    assert s.stehfest_degree == 32
    assert s.ratio_max_spread == 100.0
    assert s.ratio_max_slope == 0.05


def test_environment_overrides(fresh_settings):
    fresh_settings.setenv("SBM_WORKERS", "3")
    fresh_settings.setenv("SBM_INVERSION_RTOL", "1e-4")
    s = get_settings()
    assert s.workers == 3
    assert s.inversion_rtol == 1e-4


@pytest.mark.parametrize(
    "name,value",
    [("SBM_WORKERS", "two"), ("SBM_WORKERS", "0"), ("SBM_QUAD_TOL", "-1"), ("SBM_STEHFEST_DEGREE", "31")],
)
def test_invalid_values_name_the_variable(fresh_settings, name, value):
    fresh_settings.setenv(name, value)
    with pytest.raises(ConfigError, match="SBM_"):
        get_settings()


def test_inversion_range_must_be_ordered():
    with pytest.raises(ConfigError):
        Settings(inversion_t_min=1.0, inversion_t_max=0.5)


def test_logger_is_namespaced_and_file_only():
    logger = get_logger("unit")
    assert logger.name == "sbm.unit"
    root = logging.getLogger("sbm")
    assert root.handlers
    assert not any(isinstance(h, logging.StreamHandler) and not isinstance(h, logging.FileHandler) for h in root.handlers)


def test_numerical_error_carries_diagnostics():
    e = NumericalError("did not converge", t=0.5, estimates=(1.0, 2.0))
    assert isinstance(e, SBMError)
    assert e.diagnostics["t"] == 0.5
    assert "estimates=(1.0, 2.0)" in str(e)
