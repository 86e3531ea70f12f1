import numpy as np
import pytest

from sdwd.data import Dataset, standardize


def make_raw(n=40, p=10, seed=0, signal=2, noise=0.5):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p)) * rng.uniform(0.5, 3.0, p) + rng.normal(0, 2, p)
    w = np.zeros(p)
    w[:signal] = 1.0
    y = np.where((x - x.mean(0)) @ w + noise * rng.standard_normal(n) >= 0, 1.0, -1.0)
    y[:2] = (1.0, -1.0)
    return Dataset(x, y, tuple(f"f{j}" for j in range(p)), ("neg", "pos"))


def make_std(n=40, p=10, seed=0, **kw):
    return standardize(make_raw(n, p, seed, **kw))[0]


@pytest.fixture
def raw():
    return make_raw()


@pytest.fixture
def std_data():
    return make_std()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
