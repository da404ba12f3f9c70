import random

import pytest
from hypothesis import HealthCheck, settings

# JIT warm-up and first-call field construction make per-example deadlines
# meaningless; keep example counts modest so the whole suite stays quick.
settings.register_profile(
    "suite", deadline=None, max_examples=50,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
