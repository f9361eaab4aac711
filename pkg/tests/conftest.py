import warnings

import numpy as np
import pytest

from jostlab.core import JacobiParameters, VerblunskyCoefficients
from jostlab.opuc import sz2_forward

# values computed once at 200+ bits by two independent routes (GC sum and
# the Szego-function limit) and frozen here
U0_EXAMPLE = 0.82338012906053282418302561114114921782
U_HALF_EXAMPLE = 0.728120074004204467182172056716
M_HALF_EXAMPLE = 0.54719491309096012986304575187790905246669  # truncated resolvent, N = 120


@pytest.fixture(scope="session")
def free():
    return JacobiParameters.free()


@pytest.fixture(scope="session")
def bound_state():
    return JacobiParameters.from_lists(b=["2.5"])


@pytest.fixture(scope="session")
def example_alpha():
    return VerblunskyCoefficients.example_3_4(2)


@pytest.fixture(scope="session")
def example_J(example_alpha):
    return sz2_forward(example_alpha)


@pytest.fixture(scope="session")
def example_u_model(example_J):
    from jostlab.cli import pole_model
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return pole_model(example_J, "u", 8.0, 100)


@pytest.fixture(scope="session")
def example_B_model(example_J):
    from jostlab.cli import pole_model
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return pole_model(example_J, "B", 8.0, 100)


def random_alphas(n_fixtures=10, seed=20240611):
    """Finitely supported real alpha vectors, entries in (-0.5, 0.5), length <= 8."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_fixtures):
        L = int(rng.integers(1, 9))
        out.append(VerblunskyCoefficients(tuple(float(v) for v in rng.uniform(-0.5, 0.5, L))))
    return out


def disk_grid(radius=0.9, n=50):
    """Deterministic points filling ``|z| <= radius`` (sunflower layout)."""
    k = np.arange(1, n + 1)
    r = radius * np.sqrt(k / n)
    th = k * np.pi * (3 - np.sqrt(5))
    return r * np.exp(1j * th)


# one line per acceptance criterion, filled by test_acceptance and printed at
# the end of the run regardless of output capturing
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
