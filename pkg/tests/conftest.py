import os

import pytest
from hypothesis import settings

from pathbayes.core import Grid, ModelParams

settings.register_profile("ci", max_examples=40, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

ACCEPTANCE_LINES = []


@pytest.fixture
def desk_params():
    return ModelParams(1.0, 1.0, 0.005)


@pytest.fixture
def desk_grid():
    return Grid(-8.0, 8.0, 513)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
