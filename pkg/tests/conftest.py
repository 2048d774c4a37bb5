import numpy as np
import pytest

from ncp_eq.market import DemandCurve, MarketModel

TABLE_N = [10, 8, 6, 4, 2]
TABLE_L = [5, 5, 5, 5, 5]
TABLE_BETA = [1.2, 1.1, 1.0, 0.8, 0.6]
CORRECTED_BETA = [1.2, 1.1, 1.0, 0.9, 0.8]
REPORTED = np.array([15.4293, 12.4986, 9.6635, 7.1651, 5.1326])
Z0 = np.array([40.0, 50.0, 60.0, 55.0, 45.0])


def fd_jacobian(func, z, h_rel=1e-6):
    z = np.asarray(z, dtype=float)
    out = np.empty((len(func(z)), z.size))
    for j in range(z.size):
        h = h_rel * max(1.0, abs(z[j]))
        e = np.zeros_like(z)
        e[j] = h
        out[:, j] = (np.asarray(func(z + e)) - np.asarray(func(z - e))) / (2 * h)
    return out


def row_rel_error(a, b):
    scale = np.maximum(np.max(np.abs(b), axis=1, keepdims=True), 1e-300)
    return float(np.max(np.abs(a - b) / scale))


@pytest.fixture
def table_market():
    return MarketModel.from_parameters(TABLE_N, TABLE_L, TABLE_BETA, DemandCurve(5000, 1.1))


@pytest.fixture
def corrected_market():
    return MarketModel.from_parameters(TABLE_N, TABLE_L, CORRECTED_BETA, DemandCurve(5000, 1.1))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
