import numpy as np
import pytest

import linehit as lh

_ACCEPTANCE: list[str] = []


@pytest.fixture(scope="session")
def srw():
    return lh.make_simple_walk()


@pytest.fixture(scope="session")
def skew():
    return lh.make_skew_walk()


@pytest.fixture(scope="session")
def srw_kernel(srw):
    return lh.PotentialKernel(srw)


@pytest.fixture(scope="session")
def srw_nu(srw):
    return lh.compute_nu(srw, 2000)


@pytest.fixture(scope="session")
def srw_mu(srw):
    return lh.compute_mu(srw, 2000)


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture(scope="session")
def acceptance_log():
    """Collects one verdict line per acceptance criterion."""
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
