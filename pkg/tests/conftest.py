import os

import pytest
from hypothesis import HealthCheck, settings

from quadmap.maps import Params
from quadmap.regions import choose_constants

from _helpers import ACCEPTANCE_PAIRS

settings.register_profile("default", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(params=ACCEPTANCE_PAIRS, ids=lambda ab: f"a={ab[0]},b={ab[1]}")
def pc(request):
    p = Params(*request.param)
    return p, choose_constants(p)


def pytest_terminal_summary(terminalreporter):
    from _helpers import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
