from pathlib import Path

import pytest

from nucav.stack import load_stack

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture(scope="session")
def configs():
    return CONFIGS


@pytest.fixture(scope="session")
def marker():
    return load_stack(CONFIGS / "marker_cavity.yaml")


@pytest.fixture(scope="session")
def eit1():
    return load_stack(CONFIGS / "eit_cavity1.yaml")


@pytest.fixture(scope="session")
def eit2():
    return load_stack(CONFIGS / "eit_cavity2.yaml")


@pytest.fixture(scope="session")
def eit_single():
    return load_stack(CONFIGS / "eit_single.yaml")


@pytest.fixture(scope="session")
def vacuum():
    return load_stack(CONFIGS / "vacuum.yaml")


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def report(request):
    """Record one acceptance line: report(criterion, passed, detail)."""

    def record(criterion, passed, detail):
        line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'}  {detail}"
        request.config.stash[_ACCEPTANCE].append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash[_ACCEPTANCE]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
