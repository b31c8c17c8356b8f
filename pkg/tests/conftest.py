import numpy as np
import pytest

from conespec import cross_section as cs
from conespec import radial_scattering as rs


def relerr(a, b):
    b = complex(b)
    if b == 0:
        return abs(complex(a))
    return abs(complex(a) - b) / abs(b)


@pytest.fixture(scope="session")
def sphere3():
    return cs.sphere_spectrum(3, 0.0, 140)


@pytest.fixture(scope="session")
def sphere4():
    return cs.sphere_spectrum(4, 0.0, 160)


@pytest.fixture(scope="session")
def sphere3_v075():
    return cs.sphere_spectrum(3, 0.75, 80)


@pytest.fixture(scope="session")
def free3(sphere3):
    return rs.RadialModel(sphere3)


@pytest.fixture(scope="session")
def free4(sphere4):
    return rs.RadialModel(sphere4)


@pytest.fixture(scope="session")
def bump3(sphere3):
    return rs.RadialModel(sphere3,
                          rs.BumpPerturbation(center=1.5, width=0.5,
                                              amplitude=0.4))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240801)
