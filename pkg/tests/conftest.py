import numpy as np
import pytest

from mqte.hamiltonian import build_heisenberg_1d
from mqte.oracle import diagonalize


@pytest.fixture(scope="session")
def two_site():
    h = build_heisenberg_1d(2, 1.0, 2.0)
    return h, diagonalize(h)


@pytest.fixture(scope="session")
def six_site():
    h = build_heisenberg_1d(6, 1.0, 2.0)
    return h, diagonalize(h)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for num in sorted(results):
            terminalreporter.write_line(results[num])
