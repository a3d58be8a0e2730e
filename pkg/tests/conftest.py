import pathlib

import numpy as np
import pytest

from pilotwave import two_mode_reference
from pilotwave.scenario import build_rel_field, build_window, load

ROOT = pathlib.Path(__file__).resolve().parent.parent
SCENARIOS = ROOT / "scenarios"


@pytest.fixture(scope="session")
def two_mode():
    return two_mode_reference()


@pytest.fixture(scope="session")
def two_mode_raw():
    return two_mode_reference(normalize=False)


@pytest.fixture(scope="session")
def reference_scenario():
    return load(SCENARIOS / "prediction_reference.json")


@pytest.fixture(scope="session")
def reference_window(reference_scenario):
    return build_window(reference_scenario)


@pytest.fixture(scope="session")
def reference_field(reference_scenario):
    return build_rel_field(reference_scenario)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
