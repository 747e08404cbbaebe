import numpy as np
import pytest

from dmetric.measure import InputMeasure, ball, box, sample
from dmetric.net import toy_network

SQUARE = [[-3.0, 3.0], [-3.0, 3.0]]


@pytest.fixture(scope="session")
def w1():
    return toy_network(0.8, 1, 1, 1, 0.9, 1)


@pytest.fixture(scope="session")
def w2():
    return toy_network(1, 1, 1, 1, 1.1, 1)


@pytest.fixture(scope="session")
def w3():
    return toy_network(-2, 1, 1, 1, -1.9, 1)


@pytest.fixture(scope="session")
def all_one():
    return toy_network(1, 1, 1, 1, 1, 1)


@pytest.fixture(scope="session")
def uniform_square():
    return InputMeasure(box(SQUARE))


@pytest.fixture(scope="session")
def gauss_square():
    return InputMeasure(box(SQUARE), "truncated_gaussian", (0.0, 0.0))


@pytest.fixture(scope="session")
def uniform_disc():
    return InputMeasure(ball(3.0, 2))


@pytest.fixture(scope="session")
def uniform_samples(uniform_square):
    return sample(uniform_square, 100_000, seed=11)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


VERDICTS = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    store = request.config.stash.setdefault(VERDICTS, [])

    def record(number, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}"
        store.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
