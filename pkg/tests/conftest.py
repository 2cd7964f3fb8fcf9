import math

import numpy as np
import pytest

from maxwell_nehari.basis import BoxDomain, enumerate_modes
from maxwell_nehari.nonlinearity import NonlinearitySpec

CUBE = BoxDomain((math.pi, math.pi, math.pi))

# criterion number -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE = {}


def record(number, passed, detail):
    ACCEPTANCE[number] = (bool(passed), detail)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def cube():
    return CUBE


@pytest.fixture(scope="session")
def basis65():
    return enumerate_modes(CUBE, 6.5)


@pytest.fixture(scope="session")
def basis35():
    return enumerate_modes(CUBE, 3.5)


@pytest.fixture(scope="session")
def quartic():
    return NonlinearitySpec.power(4)


@pytest.fixture(scope="session")
def aniso_cubic():
    return NonlinearitySpec.power(3, M=np.diag([2.0, 1.0, 1.0]))
