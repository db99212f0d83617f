import numpy as np
import pytest

from e91rate.quantum import BellDiagonalState, MeasurementBasis

_ACCEPTANCE: list[tuple[str, str]] = []


def random_basis(rng: np.random.Generator) -> MeasurementBasis:
    """Haar-ish random qubit basis via a random complex vector."""
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    perp = np.array([np.conj(v[1]), -np.conj(v[0])])
    return MeasurementBasis(v, perp)


def random_bell_diagonal(rng: np.random.Generator) -> BellDiagonalState:
    c = rng.dirichlet(np.ones(4))
    c[-1] = 1 - c[:-1].sum()
    return BellDiagonalState.from_coefficients(c)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(20241016)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when != "call":
        return
    _ACCEPTANCE.append((marker.args[0], "PASS" if rep.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in _ACCEPTANCE:
        terminalreporter.write_line(f"[{status}] {name}")
