import numpy as np
import pytest

from discflow.spectral import build_basis

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def small():
    return build_basis(4, 4)


@pytest.fixture(scope="session")
def basis():
    return build_basis(8, 8)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def report_line():
    """Print a criterion line and keep it for the end-of-run summary."""
    def emit(text):
        print(text)
        _ACCEPTANCE_LINES.append(text)
    return emit


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
