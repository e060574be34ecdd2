import numpy as np
import pytest

from pantomorph import KVector, LensParams, preset_registry


@pytest.fixture(scope="session")
def presets():
    return {p.name: p for p in preset_registry()}


@pytest.fixture()
def rng():
    return np.random.default_rng(2024)


@pytest.fixture(scope="session")
def racing_lens():
    return LensParams(KVector(0.5, -0.5, 0.0), 1.0 / 0.618)
