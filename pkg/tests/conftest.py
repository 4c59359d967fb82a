import numpy as np
import pytest

from gossip_rmf.kernels import GossipParams, ModelKind, build_model

_ACCEPTANCE = []


def record_criterion(number: int, title: str, ok: bool, detail: str):
    """Print one PASS/FAIL line now and repeat it in the terminal summary."""
    line = f"CRITERION {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    _ACCEPTANCE.append((number, line))
    print("\n" + line, flush=True)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def models():
    """Every model kind at gmax=3 with the default cache parameters."""
    return {kind: build_model(kind, GossipParams()) for kind in ModelKind}


def simplex_points(rng, n, size):
    return rng.dirichlet(np.ones(n), size=size)
