import numpy as np
import pytest

from expdiff import SolverConfig, integrate
from expdiff.profiles import sine


@pytest.fixture(scope="session")
def reference_run():
    """k=1, N=256, dt=1e-3, v0 = 0.05 sin(2 pi x), integrated to T=1."""
    cfg = SolverConfig(N=256, dt=1e-3, k=1)
    v0 = sine(256, 1, 0.05)
    return v0, cfg, integrate(v0, 1.0, cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
