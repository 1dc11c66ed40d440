import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from quasitiling.constructor import construct_dynamical, disjointify, make_params  # noqa: E402
from quasitiling.folner import FolnerFamily  # noqa: E402
from quasitiling.groups import Z, Z2, box  # noqa: E402
from quasitiling.symbolic import ShiftPoint  # noqa: E402

HALF = Fraction(1, 2)


@pytest.fixture(scope="session")
def z_point():
    return ShiftPoint.from_seed(Z, "01", 11)


@pytest.fixture(scope="session")
def z_params(z_point):
    return make_params(FolnerFamily(Z), HALF, 1, [z_point], box(Z, 150), deltas=[1, 1])


@pytest.fixture(scope="session")
def z_trace(z_point, z_params):
    return construct_dynamical(z_point, z_params, box(Z, 100))


@pytest.fixture(scope="session")
def z2_point():
    return ShiftPoint.from_seed(Z2, "01", 7)


@pytest.fixture(scope="session")
def z2_params(z2_point):
    return make_params(FolnerFamily(Z2), HALF, 1, [z2_point], box(Z2, 30),
                       deltas=[Fraction(3, 2)] * 2)


@pytest.fixture(scope="session")
def z2_trace(z2_point, z2_params):
    return construct_dynamical(z2_point, z2_params, box(Z2, 16))


@pytest.fixture(scope="session")
def z2_trimmed(z2_trace):
    return disjointify(z2_trace)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
