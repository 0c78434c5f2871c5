from pathlib import Path

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(20240814))


@pytest.fixture(scope="session")
def demo_dir():
    return Path(__file__).resolve().parent.parent / "demo"
