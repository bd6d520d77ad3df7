import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qmod.quiver import Representation, build_quiver, kronecker_quiver, loop_quiver

settings.register_profile(
    "qmod", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("qmod")


def kron(a, b, quiver=None):
    """Kronecker representation with dimension vector (1, 1) and scalars ``a``, ``b``."""
    return Representation(quiver or kronecker_quiver(), (1, 1), {"a": [[a]], "b": [[b]]})


def a2_quiver():
    return build_quiver({"vertices": [1, 2], "arrows": [("x", 1, 2)]})


def random_quiver(rng, max_vertices=3, max_arrows=4):
    nv = int(rng.integers(1, max_vertices + 1))
    na = int(rng.integers(0, max_arrows + 1))
    arrows = [(f"a{k}", int(rng.integers(nv)), int(rng.integers(nv))) for k in range(na)]
    return build_quiver({"vertices": list(range(nv)), "arrows": arrows})


@pytest.fixture
def kq():
    return kronecker_quiver()


@pytest.fixture
def lq():
    return loop_quiver()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE = []


def record(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
