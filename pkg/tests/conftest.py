import math

import numpy as np
import pytest

from timinginfo.qcore import HamiltonianSpec, PureState


@pytest.fixture
def qubit_h():
    return HamiltonianSpec.diagonal([0.0, 1.0])


@pytest.fixture
def plus():
    return PureState(np.array([1.0, 1.0]) / math.sqrt(2)).density()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def bell(amplitudes):
    """Two-qubit pure state from amplitudes on |00>, |01>, |10>, |11>."""
    v = np.asarray(amplitudes, dtype=complex)
    return PureState(v / np.linalg.norm(v)).density()


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}")
