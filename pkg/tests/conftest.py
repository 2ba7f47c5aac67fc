import pytest

import fluxdiode
from fluxdiode.params import PowerLevel, load_params
from fluxdiode.transmission import KerrModel


@pytest.fixture(scope="session")
def ref_path():
    return fluxdiode.reference_params_path()


@pytest.fixture(scope="session")
def ref_params(ref_path):
    return load_params(ref_path)


@pytest.fixture(scope="session")
def fitted_model():
    """Kerr model with the measured (fitted) values of the reference device."""
    return KerrModel(
        f_res=6.784e9,
        kerr=-11.5e6,
        kappa_h=1.1e6,
        kappa_h1=160e3,
        kappa_h2=430e3,
        pstar1=PowerLevel.from_dbm(-112.0),
        pstar2=PowerLevel.from_dbm(-117.0),
        f_high=6.762e9,
        f1=6.209e9,
        f2=6.595e9,
    )
