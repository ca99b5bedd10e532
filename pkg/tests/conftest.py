import os

import numpy as np
import pytest

from calcs.module_calcs import module_from_doc
from calcs.poset_calcs import all_orientations, make_a_n, make_c, make_d4, make_grid, make_ladder
from calcs.utils import Settings, parse_json_text

DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data")


def data_path(name: str) -> str:
    return os.path.join(DATA_DIR, name)


def load_fixture(name: str):
    with open(data_path(name)) as fh:
        return parse_json_text(fh.read(), name)


def named_posets():
    posets = []
    for n in range(1, 6):
        posets.extend(make_a_n(n, word) for word in all_orientations(n - 1))
    posets.extend(make_d4(word) for word in all_orientations(3))
    posets.extend(make_c(m, l) for m in range(1, 5) for l in range(1, 6 - m))
    posets.extend([make_grid(2, 2), make_grid(2, 3)])
    posets.extend(make_ladder(m, word) for m in range(1, 4) for word in all_orientations(m - 1))
    return posets


@pytest.fixture
def d4():
    return make_d4("fbf")


@pytest.fixture
def d4_module():
    return module_from_doc(load_fixture("d4_M.json"), base_dir=DATA_DIR)


@pytest.fixture
def settings():
    return Settings()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
