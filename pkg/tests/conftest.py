from __future__ import annotations

import mpmath
import pytest

from harmsums.numerics import PrecisionConfig


@pytest.fixture
def cfg30():
    return PrecisionConfig(target_digits=30)


@pytest.fixture
def cfg50():
    return PrecisionConfig(target_digits=50)


@pytest.fixture(autouse=True)
def _restore_mp_precision():
    # numerics only touches precision inside workdps, but be strict about leaks
    before = mpmath.mp.prec
    yield
    assert mpmath.mp.prec == before, "global mpmath precision leaked"


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
