"""Shared fixtures: the bundled materials and a standard device geometry."""

import numpy as np
import pytest

from phonoscat.coupling import Inclusion, MicrowaveMode, default_eps_eff
from phonoscat.materials import Orientation, default_materials

# Film-normal cut: crystal X along lab z, crystal Z along lab -x.  With the
# field along lab y this drives the strong in-plane piezo coefficients.
XCUT_MATRIX = np.array([[0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])


@pytest.fixture(scope="session")
def db():
    return default_materials()


@pytest.fixture(scope="session")
def ln(db):
    return db["lithium_niobate"]


@pytest.fixture(scope="session")
def substrate(db):
    return db["sapphire_iso"]


@pytest.fixture(scope="session")
def sapphire(db):
    return db["sapphire"]


@pytest.fixture(scope="session")
def silicon(db):
    return db["silicon"]


@pytest.fixture(scope="session")
def xcut():
    return Orientation(XCUT_MATRIX)


def make_mode(substrate, f_hz=10e9, mode_volume=8e-15, direction=(0.0, 1.0, 0.0)):
    return MicrowaveMode(
        omega0=2 * np.pi * f_hz,
        mode_volume=mode_volume,
        field_direction=np.asarray(direction, dtype=float),
        eps_eff=default_eps_eff(substrate),
    )


@pytest.fixture
def mode(substrate):
    """10 GHz mode with the calibration volume, field along lab y."""
    return make_mode(substrate)


@pytest.fixture
def waveguide(ln, xcut):
    """The reference transducer waveguide, 0.5 x 1 x 5 um."""
    return Inclusion(
        dimensions=np.array([0.5e-6, 1.0e-6, 5.0e-6]),
        center=np.zeros(3),
        material=ln,
        orientation=xcut,
    )


@pytest.fixture
def small_cube(ln, xcut):
    """A 10 nm cube, deep in the point-scatterer regime at GHz frequencies."""
    return Inclusion(
        dimensions=np.full(3, 10e-9),
        center=np.zeros(3),
        material=ln,
        orientation=xcut,
    )
