import numpy as np
import pytest

from mcsbr import scenes


@pytest.fixture(scope="session")
def glass_cube():
    return scenes.builtin_scene("glass_cube")


@pytest.fixture(scope="session")
def plate_scene():
    return scenes.builtin_scene("plate")


@pytest.fixture(scope="session")
def nested_scene():
    return scenes.builtin_scene("nested")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    from acceptance_report import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(LINES):
            terminalreporter.write_line(LINES[n])

