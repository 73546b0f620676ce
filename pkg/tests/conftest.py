import numpy as np
import pytest

from risma.checks import random_instance
from risma.model import SystemConfig


@pytest.fixture
def config():
    return SystemConfig()


@pytest.fixture(params=[0, 1, 2])
def instance(request):
    """(config, scenario, state) at the default dimensions with random W and T."""
    return random_instance(request.param)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def assert_state_feasible(state, config, scenario=None):
    """Power, RIS-mode and position constraints of one solver state."""
    from risma.positions import feasible

    assert np.sum(np.abs(state.W) ** 2) <= config.pmax * (1 + 1e-9)
    mag = np.abs(state.phi)
    if config.ris_mode == "irc":
        assert np.all(mag <= 1 + 1e-9)
    else:
        assert np.all(np.abs(mag - 1) <= 1e-9)
    if config.ris_mode == "dps":
        step = 2 * np.pi / config.dps_levels
        idx = np.mod(np.angle(state.phi), 2 * np.pi) / step
        assert np.all(np.abs(idx - np.round(idx)) * step <= 1e-9)
    if config.antenna_mode == "ma":
        assert feasible(state.T, config)


def pytest_terminal_summary(terminalreporter):
    from .test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
