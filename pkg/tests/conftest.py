import sys
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from readlab.core import FiniteVector
from readlab.renorm import ReadNormSpec

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running sweep")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])


@pytest.fixture
def small_spec():
    """V = {e1, e2}, r = (1/4, 1/8) in two dimensions."""
    e1, e2 = FiniteVector.basis(1, 2), FiniteVector.basis(2, 2)
    return ReadNormSpec(2, (Fraction(1, 4), Fraction(1, 8)), (e1, e2), epsilon=Fraction(1))


def vec(*vals):
    return FiniteVector.from_dense([Fraction(v) for v in vals])
