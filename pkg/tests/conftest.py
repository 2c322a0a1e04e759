import json

import numpy as np
import pytest

from ppf_dnn.grid import bundled_case_path, load_case, parse_case
from ppf_dnn.models.inputs import UncertaintySpec
from ppf_dnn.sampling import build_dataset


TWO_BUS = {
    "name": "two-bus",
    "base_mva": 100.0,
    "buses": [
        {"id": 1, "kind": "slack", "v_setpoint": 1.0},
        {"id": 2, "kind": "pq", "p_load_mw": 50.0},
    ],
    "branches": [{"from": 1, "to": 2, "r": 0.0, "x": 0.1}],
    "gens": [{"bus": 1}],
}

FOUR_BUS = {
    "name": "four-bus",
    "base_mva": 100.0,
    "buses": [
        {"id": 1, "kind": "slack", "v_setpoint": 1.02},
        {"id": 2, "kind": "pv", "v_setpoint": 1.01, "p_load_mw": 10.0, "q_load_mvar": 5.0},
        {"id": 3, "kind": "pq", "p_load_mw": 60.0, "q_load_mvar": 20.0},
        {"id": 4, "kind": "pq", "p_load_mw": 40.0, "q_load_mvar": 15.0, "shunt_b": 0.02},
    ],
    "branches": [
        {"from": 1, "to": 2, "r": 0.01, "x": 0.08},
        {"from": 1, "to": 3, "r": 0.02, "x": 0.12},
        {"from": 2, "to": 3, "r": 0.015, "x": 0.1},
        {"from": 2, "to": 4, "r": 0.01, "x": 0.09},
        {"from": 3, "to": 4, "r": 0.02, "x": 0.15},
    ],
    "gens": [{"bus": 1}, {"bus": 2, "p_mw": 40.0}],
}


@pytest.fixture
def two_bus_text():
    return json.dumps(TWO_BUS)


@pytest.fixture
def two_bus(two_bus_text):
    return parse_case(two_bus_text)


@pytest.fixture
def four_bus():
    return parse_case(json.dumps(FOUR_BUS))


@pytest.fixture(scope="session")
def case30():
    return load_case(bundled_case_path("case30"))


@pytest.fixture(scope="session")
def case118():
    return load_case(bundled_case_path("case118"))


@pytest.fixture
def four_bus_spec(four_bus):
    return UncertaintySpec.from_case(four_bus, 0.1)


@pytest.fixture
def four_bus_dataset(four_bus, four_bus_spec):
    return build_dataset(four_bus, four_bus_spec, 60, seed=3, split=(40, 10, 10))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
