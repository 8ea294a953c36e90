import sys

import numpy as np
import pytest

from subthz_fso.scenario import table1_defaults


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def defaults():
    return table1_defaults()


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.summary_lines():
        terminalreporter.write_line(line)
