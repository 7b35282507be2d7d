import functools

import numpy as np
import pytest

from invariantctl.family import build_families
from invariantctl.planner import build_plan
from invariantctl.presets import TARGET_NAMES, preset
from invariantctl.qubit import state_from_hamiltonian_vector

OMEGA = 2 * np.pi * 0.4
T_FINAL = 3.2


@functools.lru_cache(maxsize=None)
def setup_target(name, convention="published", degree=18):
    h0, hT = preset(name, OMEGA, convention)
    plan = build_plan(h0, hT, T_FINAL)
    fams = build_families(plan, degree)
    return plan, fams, state_from_hamiltonian_vector(plan.h_final)


@pytest.fixture(params=TARGET_NAMES)
def target(request):
    return (request.param,) + setup_target(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
