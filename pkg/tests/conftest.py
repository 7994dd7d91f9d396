import sys
from pathlib import Path

import pytest

from ctgind.spec import load_spec

HERE = Path(__file__).resolve().parent
ROOT = HERE.parent
FIXTURES = ROOT / "fixtures"
sys.path.insert(0, str(HERE))

from oracle import Oracle  # noqa: E402


def fixture_path(name: str) -> str:
    return str(FIXTURES / f"{name}.spec")


@pytest.fixture(scope="session")
def specs():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = load_spec(fixture_path(name))
        return cache[name]

    return get


@pytest.fixture(scope="session")
def sorted_spec(specs):
    return specs("sorted_lists")


@pytest.fixture(scope="session")
def power_spec(specs):
    return specs("powerlists")


@pytest.fixture(scope="session")
def oracles(specs):
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = Oracle(specs(name))
        return cache[name]

    return get


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, (status, detail) in sorted(mod.RESULTS.items()):
        terminalreporter.write_line(f"{status} {name.removeprefix('test_')}: {detail}")
