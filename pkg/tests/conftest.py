import os

import pytest

from hmlift.systems import load_system

SYSTEMS = os.path.join(os.path.dirname(__file__), os.pardir, "systems")


def system_path(name):
    return os.path.abspath(os.path.join(SYSTEMS, f"{name}.sys"))


def load(name):
    with open(system_path(name)) as fh:
        return load_system(fh.read())


@pytest.fixture
def dfa_a():
    return load("dfa-a")


@pytest.fixture
def dfa_b():
    return load("dfa-b")


@pytest.fixture
def lts_d():
    return load("lts-d")


@pytest.fixture
def lts_s():
    return load("lts-s")


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
