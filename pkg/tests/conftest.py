"""
Shared fixtures for the KANO test suite
"""
import numpy as np
import pytest

from core.unfolding.model import KanoModel, ModelSettings


def pytest_addoption(parser):
    parser.addoption("--run-slow", action="store_true", default=False,
                     help="run the long training experiments")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_settings():
    """Desk-scale architecture: 3 channels, 3x3 kernels, scale 2, two stages"""
    return ModelSettings(channels=3, kernel_size=3, scale=2, stages=2, seed=0,
                         grid={'grid_size': 4, 'degree': 3})


@pytest.fixture
def small_model(small_settings):
    return KanoModel(small_settings)
