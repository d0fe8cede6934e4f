import dataclasses
from pathlib import Path

import pytest
from hypothesis import settings

from subdyn import Kinetics, ModelSpec

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"

settings.register_profile("default", deadline=None, max_examples=25)
settings.load_profile("default")


def fast_spec(g2=1e-3, **kw) -> ModelSpec:
    """Second-order-only spec; cheap enough for property tests."""
    return dataclasses.replace(ModelSpec(), include_order4=False, **kw).with_coupling(g2)


@pytest.fixture(scope="session")
def baseline():
    return ModelSpec()


@pytest.fixture(scope="session")
def free():
    return ModelSpec().with_coupling(0.0)


@pytest.fixture(scope="session")
def kin(baseline):
    return Kinetics(baseline)


@pytest.fixture(scope="session")
def kin_free(free):
    return Kinetics(free)
