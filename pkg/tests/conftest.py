import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def random_matrix(rng, n, scale=1.0, real=False):
    M = rng.standard_normal((n, n))
    if not real:
        M = M + 1j * rng.standard_normal((n, n))
    return scale * M / np.linalg.norm(M)


def random_skew(rng, n, scale=1.0):
    M = rng.standard_normal((n, n))
    S = M - M.T
    return scale * S / np.linalg.norm(S)


# acceptance results, printed once at the end of the session
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
        terminalreporter.write_line(line)
