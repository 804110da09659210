import numpy as np
import pytest

from qaplon.generators import CLASSES, GeneratorConfig, generate
from qaplon.qap import QapInstance

_VERDICTS = []


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in _VERDICTS:
        terminalreporter.write_line(line)


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for the acceptance summary, then assert it."""
    def record(name, passed, detail=""):
        _VERDICTS.append(f"[{'PASS' if passed else 'FAIL'}] {name}" + (f"  ({detail})" if detail else ""))
        assert passed, f"{name}: {detail}"
    return record


@pytest.fixture
def tiny():
    """The two-facility example: cost 11 for the identity, 10 for the swap."""
    return QapInstance([[0, 1], [2, 0]], [[0, 3], [4, 0]])


def random_instance(rng, n, high=50, zero_frac=0.0):
    dist = rng.integers(0, high, size=(n, n))
    flow = rng.integers(0, high, size=(n, n))
    if zero_frac:
        flow[rng.random((n, n)) < zero_frac] = 0
    np.fill_diagonal(dist, 0)
    np.fill_diagonal(flow, 0)
    flow[0, 1] = max(flow[0, 1], 1)
    return QapInstance(dist, flow)


@pytest.fixture
def rng():
    return np.random.default_rng(20100)


def generated(n, count, base=0):
    return [generate(GeneratorConfig(cls, n, seed=base + 97 * i))
            for cls in CLASSES for i in range(count)]
