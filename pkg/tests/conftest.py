import numpy as np
import pytest

from eigenclass.dataset import SyntheticSpec, generate_synthetic
from eigenclass.kernels import BACKENDS

ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(line[1])


@pytest.fixture(params=sorted(BACKENDS))
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def small_synth():
    """2 classes, 20 train / 10 test each, 16x16, low noise."""
    return generate_synthetic(SyntheticSpec(n_classes=2, n_train=20, n_test=10, width=16, height=16, noise=10), seed=7)


@pytest.fixture(scope="session")
def four_class_synth():
    return generate_synthetic(SyntheticSpec(n_classes=4, n_train=12, n_test=6, width=16, height=16, noise=40), seed=3)
