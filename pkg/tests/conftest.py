import numpy as np
import pytest

from allee.model import ModelParams

# parameter sets used throughout: a gamma3*gamma4 = 1 family and a gamma4 = 1 family
S, G2, G3 = 1.0, 0.1, 2.67


@pytest.fixture
def p_unit_product():
    return ModelParams(S, G2, G3, 1.0 / G3)


@pytest.fixture
def p_base():
    return ModelParams(S, G2, G3, 1.0)


@pytest.fixture
def p_jump():
    return ModelParams(S, G2, G3, 1.0, lam=0.0, epsilon=0.5, alpha=1.5)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
