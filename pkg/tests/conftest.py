from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import helpers  # noqa: E402


@pytest.fixture
def l1():
    return helpers.l1()


@pytest.fixture
def l2():
    return helpers.l2()


@pytest.fixture
def l_loop():
    return helpers.l_loop()


@pytest.fixture
def l_skip():
    return helpers.l_skip()


@pytest.fixture(scope="session")
def sepsis():
    return helpers.sepsis_sample()


@pytest.fixture(scope="session")
def rtfm():
    return helpers.rtfm_scale_log()


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return Path(__file__).parent / "fixtures"


def pytest_terminal_summary(terminalreporter):
    """Echo acceptance verdict lines even when output capture is on."""
    module = sys.modules.get("test_acceptance")
    verdicts = getattr(module, "VERDICTS", [])
    if verdicts:
        terminalreporter.section("acceptance verdicts")
        for line in verdicts:
            terminalreporter.write_line(line)
