import numpy as np
import pytest

from qlab.optimization import FiducialSearchConfig, find_fiducial

_SICS = {}


def sic(dim):
    """Certified SIC in ``dim`` from the default search, cached per session."""
    if dim not in _SICS:
        res = find_fiducial(FiducialSearchConfig(dim, seed=2024))
        assert res.success, f"fiducial search failed in d={dim}"
        _SICS[dim] = res
    return _SICS[dim].sic


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def sic_in():
    return sic


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
