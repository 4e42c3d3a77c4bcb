import sys

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")

REFERENCE_MEANS = (1.0, 0.85, 0.8, 0.75)
REFERENCE_W_STAR = np.array([0.403, 0.366, 0.147, 0.083])


class ZeroNoise:
    """Generator stand-in whose normal draws are all zero."""

    def standard_normal(self):
        return 0.0


@pytest.fixture
def zero_rng():
    return ZeroNoise()


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[n])
