import math

import pytest

from dipolegate.dynamics import System
from dipolegate.molecules import Geometry, get_preset


@pytest.fixture
def lattice():
    return Geometry("lattice", r=1e-6, theta=0.0)


@pytest.fixture
def wire():
    return Geometry("wire", r=1e-5, theta=0.0, h=1e-7)


@pytest.fixture
def co_system(lattice):
    co = get_preset("CO")
    return System(co, co, lattice)


@pytest.fixture
def nacl_system(wire):
    nacl = get_preset("NaCl")
    return System(nacl, nacl, wire)


@pytest.fixture
def lics_system(lattice):
    mol = get_preset("LiCs")
    return System(mol, mol, lattice)


@pytest.fixture
def rbcs_system(lattice):
    mol = get_preset("RbCs", e_dipole=1.0)
    return System(mol, mol, lattice)


TWO_PI = 2.0 * math.pi
