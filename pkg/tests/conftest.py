import numpy as np
import pytest

from twistqft.funcspace import GaussianPacket
from twistqft.geometry import make_reference_theta
from twistqft.wick import OnShellQuadrature


@pytest.fixture(scope="session")
def theta1():
    return make_reference_theta(1.0)


@pytest.fixture(scope="session")
def quad_m1():
    """Shared unit-mass rule, resolved well past every packet used in tests."""
    return OnShellQuadrature.composite_gl(mass=1.0, cutoff=25.0, panels=60)


@pytest.fixture()
def rng():
    return np.random.default_rng(42)


@pytest.fixture(scope="session")
def packets():
    """A handful of distinct packets reused across correlator tests."""
    return (
        GaussianPacket(center=(0.0, -0.6), widths=(0.8, 0.9), carrier=(0.3, 0.2)),
        GaussianPacket(center=(0.2, 0.5), widths=(0.9, 0.7), carrier=(-0.2, 0.4)),
        GaussianPacket(center=(-0.1, 0.1), widths=(0.7, 0.8), carrier=(0.1, -0.3)),
        GaussianPacket(center=(0.1, -0.2), widths=(0.8, 0.8), carrier=(-0.3, 0.1)),
    )
