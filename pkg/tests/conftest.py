import numpy as np
import pytest

from dfrgrad.dataset import SynthSpec, generate_synthetic, normalize
from dfrgrad.reservoir import LINEAR, NonlinearityKind, ReservoirParams, generate_mask

MG2 = NonlinearityKind("mackey-glass", 2)
KINDS = (LINEAR, MG2)


def random_params(rs, nx, nu, kind=LINEAR, lo=0.05, hi=0.8, seed=None):
    seed = int(rs.integers(1 << 32)) if seed is None else seed
    return ReservoirParams(float(rs.uniform(lo, hi)), float(rs.uniform(lo, hi)), generate_mask(seed, nx, nu), kind)


@pytest.fixture
def rs():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def tiny_dataset():
    data, _ = normalize(generate_synthetic(SynthSpec(per_class=6, length=16, noise=0.05, seed=3)))
    return data


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
