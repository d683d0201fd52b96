import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from biortho import coefficients as co

settings.register_profile(
    "repo",
    derandomize=True,
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

SEED = 0xC0FFEE


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture
def scalar():
    return co.constant([[1]], [[0]], [[1]])


@pytest.fixture
def triple():
    return co.constant([[2, 0], [7, 5]], [[0, 0], [0, 8]], [[2, 0], [0, 1]])


@pytest.fixture
def laguerre():
    return co.laguerre_christoffel(0.0)


@pytest.fixture
def ex2():
    return co.paper_example_2()


def builtin_ids():
    return list(co.builtin_families())


@pytest.fixture(params=builtin_ids())
def builtin(request):
    fam, seq = co.builtin_families()[request.param]
    return request.param, fam, seq


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
