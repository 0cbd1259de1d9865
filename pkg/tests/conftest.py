from __future__ import annotations

import numpy as np
import pytest

from advassign.model import GameInstance


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def make_instance(p, u, tau=1, budget=None, capacities=None) -> GameInstance:
    return GameInstance.from_arrays(p, u, tau, budget, capacities)
