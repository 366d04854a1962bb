import functools

import pytest

from telesim import experiment
from telesim.experiment import Scenario, SetupConfig


@functools.lru_cache(maxsize=None)
def _leading_order(kind: str, stages: int = 2, **overrides):
    config = SetupConfig(**overrides)
    lo, samples = experiment.leading_order(config, Scenario(kind, stages=stages))
    return lo, tuple(samples)


@pytest.fixture(scope="session")
def threefold_lo():
    return _leading_order("threefold")


@pytest.fixture(scope="session")
def fourfold_lo():
    return _leading_order("fourfold")


@pytest.fixture(scope="session")
def threefold_base(threefold_lo):
    _, samples = threefold_lo
    return samples[0]
