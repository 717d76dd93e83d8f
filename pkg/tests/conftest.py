import numpy as np
import pytest

from augmc.checks import random_fhmm, random_prior  # noqa: F401  (re-exported for tests)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def binomial_se(p, n):
    return np.sqrt(np.maximum(p * (1 - p), 1e-300) / n)


ACCEPTANCE_LINES = []


def record_criterion(number, title, passed, detail):
    line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
