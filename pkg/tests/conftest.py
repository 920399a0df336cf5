import numpy as np
import pytest

from lrchain.opw import ChainSpec

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_spec(rng, n_qubits, low=0.0, high=2.0):
    return ChainSpec(n_qubits, rng.uniform(low, high, n_qubits - 1))
