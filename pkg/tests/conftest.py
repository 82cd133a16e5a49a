import numpy as np
import pytest

from harmonic_euler import euler, fuchsian

SIGNATURES = {
    "genus2": fuchsian.OrbifoldSignature(2, (), 0),
    "modular": fuchsian.OrbifoldSignature(0, (2, 3), 1),
    "triangle237": fuchsian.OrbifoldSignature(0, (2, 3, 7), 0),
    "torus2": fuchsian.OrbifoldSignature(1, (2,), 0),
}


@pytest.fixture(scope="session")
def presentations():
    return {k: fuchsian.catalog(s) for k, s in SIGNATURES.items()}


@pytest.fixture(scope="session")
def fuchsian_reps(presentations):
    return {k: euler.fuchsian_rep(p) for k, p in presentations.items()}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# criterion number -> (passed, detail), filled by the acceptance suite
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
