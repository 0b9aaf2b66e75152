import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from montygame.model import make_preset  # noqa: E402


@pytest.fixture
def classic():
    return make_preset("classic-symmetric")


@pytest.fixture
def biased():
    def build(q):
        return make_preset("host-biased", q=q)

    return build


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    setattr(item, f"rep_{rep.when}", rep)


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_RESULTS

    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
