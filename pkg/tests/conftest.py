# tests/conftest.py
import math

import numpy as np
import pytest

from uqcs.schemas import NQRDriveSpec, SpinChainSpec, TwoModeNHSpec

TWO_SITE_ENERGIES = (-4.258, -1.401, 2.159, 3.500)


@pytest.fixture
def two_site_spec():
    return SpinChainSpec(n_sites=2, J=(-1.0, -1.0, -1.5), h=(1.5, 0.0, 0.5))


@pytest.fixture
def eight_site_spec():
    return SpinChainSpec(n_sites=8, J=(-1.0, -1.0, -1.5), h=(1.5, 0.0, 0.5), periodic=True)


@pytest.fixture
def up_down():
    psi = np.zeros(4, dtype=np.complex128)
    psi[1] = 1.0
    return psi


def two_mode(g: float) -> TwoModeNHSpec:
    return TwoModeNHSpec(delta1=1.0, delta2=1.0, g1=g, g2=g, kappa=0.5)


def nqr(theta: float, B: float = 2.0, Omega: float = 0.5) -> NQRDriveSpec:
    return NQRDriveSpec(B=B, theta=theta, Omega=Omega)


@pytest.fixture
def nqr_quarter():
    return nqr(math.pi / 4)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
