import numpy as np
import pytest

from qmrg import CouplingVector, LatticeConfig


@pytest.fixture
def quartic():
    return CouplingVector.anharmonic(2.4, 1.0, 1.0, 6)


@pytest.fixture
def small_cfg():
    return LatticeConfig(1000, 10.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
