import numpy as np
import pytest

from twophase.params import FluidParams, derive_constants
from twophase.roots import calibrate


@pytest.fixture(scope="session")
def params():
    return FluidParams(rho_plus=1.0, rho_minus=2.0, mu_plus=1.0, mu_minus=1.0,
                       sigma=1.0, gravity=3.0)


@pytest.fixture(scope="session")
def consts(params):
    return derive_constants(params)


@pytest.fixture(scope="session")
def calib(params, consts):
    return calibrate(params, consts)


@pytest.fixture(scope="session")
def asym_params():
    """Unequal viscosities/densities to keep symmetric cancellations honest."""
    return FluidParams(rho_plus=0.8, rho_minus=2.5, mu_plus=1.3, mu_minus=0.6,
                       sigma=0.7, gravity=2.0)


@pytest.fixture(scope="session")
def asym_consts(asym_params):
    return derive_constants(asym_params)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260809)
