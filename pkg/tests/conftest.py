import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

from l1penalty.model import Dataset, standardize  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_dataset(n, p, rng, family="lasso", beta=None, noise=1.0):
    X = standardize(Dataset(rng.standard_normal((n, p)))).X
    if beta is None:
        beta = np.zeros(p)
        beta[: min(3, p)] = [1.0, -0.5, 0.25][: min(3, p)]
    u = X @ beta
    if family == "poisson-wsf":
        Y = rng.poisson(np.exp(u)).astype(float)
    else:
        Y = u + noise * rng.standard_normal(n)
    return Dataset(X, Y, standardized=True)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
