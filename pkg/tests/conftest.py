import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


def random_coefficients(count=20, n=128, seed=2024):
    """Nonnegative sequences with a few exact zero cells and a zero run in each."""
    rng = np.random.default_rng(seed)
    out = []
    for s in range(count):
        a = rng.uniform(0.0, 3.0, n) * rng.choice([0.3, 1.0, 2.0])
        a[rng.choice(n, 6, replace=False)] = 0.0
        start = rng.integers(5, n - 15)
        a[start:start + rng.integers(2, 10)] = 0.0
        out.append(a)
    return out


@pytest.fixture(scope="session")
def coeff_suite():
    return random_coefficients()


@pytest.fixture(scope="session")
def record():
    def _rec(line: str):
        ACCEPTANCE_LINES.append(line)
        print(line)
    return _rec


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
