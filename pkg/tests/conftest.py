import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hpx.groups import GroupSpec, SubsetMask

settings.register_profile("hpx", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("hpx")


@pytest.fixture
def cap_f3_2():
    """The AP-free 4-set {0,1}^2 in F_3^2."""
    spec = GroupSpec(3, (2,))
    return SubsetMask.from_ranks(spec, [0, 1, 3, 4])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    from _acceptance_log import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n])
