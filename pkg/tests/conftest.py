import numpy as np
import pytest

from gpesplit.bench import make_seed
from gpesplit.flows import ModelParams
from gpesplit.ground_state import GroundStateConfig, descend
from gpesplit.hermite import build_basis

_acceptance = []


@pytest.fixture(scope="session")
def basis16():
    return build_basis(1.0, 16)


@pytest.fixture(scope="session")
def params():
    return ModelParams(beta=2.0, gamma=1.0)


@pytest.fixture(scope="session")
def ground_states(basis16, params):
    """Benchmark I descents (tau=0.01, q=4, 30 time units) from both published seeds."""
    cfg = GroundStateConfig(c=1.0, tau=0.01, q=4, max_iters=3000, stagnation_tol=0.0)
    return {
        seed: descend(basis16, params, cfg, make_seed(basis16, seed))
        for seed in ("paper_seed_1", "h00")
    }


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))
    elif "test_acceptance.py" in report.nodeid and report.when == "setup" and report.outcome != "passed":
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        verdict = "PASS" if outcome == "passed" else "FAIL" if outcome == "failed" else outcome.upper()
        terminalreporter.write_line(f"{verdict:5s} {name}")
