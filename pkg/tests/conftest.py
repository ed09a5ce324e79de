import numpy as np
import pytest

from unilab.kernels import backends
from unilab.models import SeedSpec

BACKENDS = backends()


@pytest.fixture(params=sorted(BACKENDS))
def kern(request):
    """Each kernel module that is available: the numpy fallback and, if built, the compiled one."""
    return BACKENDS[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def seed(master=0, trial=0, label=""):
    return SeedSpec(master, trial, label)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":").rstrip("abc"))):
            terminalreporter.write_line(line)
