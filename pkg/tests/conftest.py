import pytest

from twophoton.models import ConstantBox, Harmonic, SymmetricLinear
from twophoton.numerics import ProductState, default_grid, solve_axis
from twophoton.oracle import SeparableSpectrum

UNITS = {"m": 1, "hbar": 1, "c": 1}


def grid_spectrum(potential, n=1024, axes=(0, 1, 2), full=True, count=4):
    """Per-axis grid bases; `full` keeps every eigenpair for the oracles."""
    bases = {
        a: solve_axis(potential, default_grid(potential, a, n), None if full else count, axis=a, mass=1, bindings=UNITS)
        for a in axes
    }
    return SeparableSpectrum(bases)


def box_state(spec: SeparableSpectrum, n) -> ProductState:
    """Product state from 1-based box quantum numbers."""
    return spec.product_state(tuple(k - 1 for k in n))


@pytest.fixture(scope="session")
def harmonic_spectrum():
    return grid_spectrum(Harmonic(1))


@pytest.fixture(scope="session")
def linear_spectrum():
    return grid_spectrum(SymmetricLinear(1, 2, 3))


@pytest.fixture(scope="session")
def box_spectrum():
    return grid_spectrum(ConstantBox(1))


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
