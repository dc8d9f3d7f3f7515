import pytest
from hypothesis import HealthCheck, settings

from helpers import T0_TEXT
from ptapprox.tree import parse_tree

settings.register_profile(
    "default", deadline=None, max_examples=100, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def t0():
    return parse_tree(T0_TEXT)
