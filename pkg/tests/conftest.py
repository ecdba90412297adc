import numpy as np
import pytest

from frontlab.evolve import select_rates
from frontlab.front import initial_guess, solve_front
from frontlab.grid import make_grid
from frontlab.manifold import LPConfig, StableFoliation
from frontlab.model import builtin_model
from frontlab.spectrum import adjoint_zero_mode, assemble_linearization, mid_window_weight


def _front(X, N, beta=0.5):
    m = builtin_model("gasless_combustion", beta=beta)
    g = make_grid(X, N)
    guess = initial_guess(m, (np.zeros(2), m.right_state), g, 0.5)
    return m, solve_front(m, guess, 0.7, grid=g)


@pytest.fixture(scope="session")
def gasless():
    return builtin_model("gasless_combustion", beta=0.5)


@pytest.fixture(scope="session")
def small_front():
    """Coarse gasless front (X=40, N=801) for fast unit tests."""
    return _front(40.0, 801)


@pytest.fixture(scope="session")
def small_setup(small_front):
    model, prof = small_front
    w = mid_window_weight(prof)
    op = assemble_linearization(model, prof, 0.0, w)
    return model, prof, w, op, adjoint_zero_mode(op)


@pytest.fixture(scope="session")
def small_foliation(small_setup):
    model, prof, w, op, pair = small_setup
    # rates measured on the reference grid
    cfg = LPConfig(select_rates(0.3033, 0.1430))
    return StableFoliation(model, prof, w, cfg)


@pytest.fixture(scope="session")
def ref_front():
    """Reference configuration: gasless, beta=0.5, X=60, N=2401."""
    return _front(60.0, 2401)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, ok: bool, detail: str) -> None:
    """Store and print one acceptance line."""
    line = f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
