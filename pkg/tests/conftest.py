import math
from pathlib import Path

import numpy as np
import pytest

from polybeam.model import BeamAngles, ChannelMatrix, RateParams
from polybeam.pipeline import load_config, run_sweep

REPO_SEED = 42


@pytest.fixture
def channel():
    return ChannelMatrix.random(2, 2, REPO_SEED)


@pytest.fixture
def params():
    return RateParams()


@pytest.fixture
def center():
    return BeamAngles(math.pi, math.pi)


@pytest.fixture
def rng():
    return np.random.default_rng(20260101)


SWEEP_CONFIG = Path(__file__).resolve().parents[1] / "configs" / "sweep.cfg"


@pytest.fixture(scope="session")
def sweep_config():
    return load_config(SWEEP_CONFIG)


@pytest.fixture(scope="session")
def sweep_records(sweep_config):
    return run_sweep(sweep_config)
