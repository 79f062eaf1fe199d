"""
Shared fixtures: small discretizations of the three data families.
"""

import pytest

from hyperbolic_blowup.fields import BumpProfile, InitialData, ProductProfile
from hyperbolic_blowup.quadrature import Discretization, KernelKind

# Coarse enough to keep every test under a second or two
Z_MIN = -10.0
N_Z1 = 64
N_U = 17


def bump(amplitude: float = 1.0) -> ProductProfile:
    """Default product bump on [1, 3] x [0, 2], positive on x2 = 0."""
    return ProductProfile(BumpProfile(2.0, 1.0, amplitude), BumpProfile(0.0, 2.0, 1.0))


@pytest.fixture
def euler_data() -> InitialData:
    return InitialData.build(bump(), ProductProfile.zero())


@pytest.fixture
def boussinesq_data() -> InitialData:
    return InitialData.build(ProductProfile.zero(), bump())


@pytest.fixture
def zero_data() -> InitialData:
    return InitialData.build(ProductProfile.zero(), ProductProfile.zero())


@pytest.fixture
def euler_disc(euler_data: InitialData) -> Discretization:
    return Discretization.build(euler_data, z_min=Z_MIN, n_z1=N_Z1, n_u=N_U)


@pytest.fixture
def boussinesq_disc(boussinesq_data: InitialData) -> Discretization:
    return Discretization.build(boussinesq_data, z_min=Z_MIN, n_z1=N_Z1, n_u=N_U)


@pytest.fixture
def zero_disc(zero_data: InitialData) -> Discretization:
    return Discretization.build(zero_data, z_min=Z_MIN, n_z1=N_Z1, n_u=N_U)


@pytest.fixture
def euler_disc_squared(euler_data: InitialData) -> Discretization:
    return Discretization.build(euler_data, z_min=Z_MIN, n_z1=N_Z1, n_u=N_U, kernel=KernelKind.SECH_SQUARED)
