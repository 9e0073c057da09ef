import numpy as np
import pytest

from pmproc.quantum import haar_unitary, random_density
from pmproc.rng import make_rng


@pytest.fixture
def rng():
    return make_rng(1234)


def random_skew(dim, rng):
    Z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (Z - Z.conj().T)


def random_instance(dim, rng):
    return haar_unitary(dim, rng), random_density(dim, rng), random_density(dim, rng)


def ginibre(dim, rng):
    return (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)


ACCEPTANCE_LINES = []


def report_criterion(label, passed, detail=""):
    """Record one acceptance line; all of them are echoed in the terminal summary."""
    line = f"{'PASS' if passed else 'FAIL'} criterion {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
