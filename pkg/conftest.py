import itertools
import os

import hypothesis
import numpy as np
import pytest

from egl_toolkit.models.distribution import EglParams
from egl_toolkit.services.datasets import dataset_service

np.seterr(all="warn")

hypothesis.settings.register_profile("default", max_examples=50, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=500, deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))

# Published optimum of EGL on the bladder remission data
BLADDER_EGL = EglParams(lam=0.936, theta=0.5878, alpha=0.6457)
# Published EGL parameters for the bank waiting times
BANK_EGL = EglParams(lam=1.803, theta=0.093, alpha=1.046)

PARAMETER_GRID = [
    EglParams(lam=lam, theta=theta, alpha=alpha)
    for alpha, theta, lam in itertools.product((0.3, 1.0, 3.0), (0.2, 1.0, 5.0), (0.5, 1.0, 2.0))
]


def grid_id(p: EglParams) -> str:
    return f"lam={p.lam}-theta={p.theta}-alpha={p.alpha}"


@pytest.fixture(scope="session")
def bladder():
    return dataset_service.builtin("bladder")


@pytest.fixture(scope="session")
def bank():
    return dataset_service.builtin("bank")


@pytest.fixture
def unit_params():
    return EglParams(lam=1.0, theta=1.0, alpha=1.0)
