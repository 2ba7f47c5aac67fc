"""Semiclassical model of a flux-qubit microwave diode.

Submodules
----------
params        device parameters, unit handling, parameter files
hybrid        hybrid-mode frequencies, mixing angle, damping budget
transmission  Kerr/Duffing transmission, peak loci, rectification maps
qubit         flux-qubit spectrum in the two-island charge basis
calibration   in-situ background calibration of measured sweeps
fitting       least-squares parameter recovery and synthetic data
cli           command-line interface
"""

from importlib import resources

from fluxdiode._kernels import BACKEND as KERNEL_BACKEND
from fluxdiode.params import (
    CircuitParams,
    FluxQubitParams,
    PowerLevel,
    dbm_to_watts,
    load_params,
    load_qubit_params,
    watts_to_dbm,
)

__version__ = "0.1.0"

__all__ = [
    "CircuitParams", "FluxQubitParams", "PowerLevel",
    "dbm_to_watts", "watts_to_dbm", "load_params", "load_qubit_params",
    "reference_params_path", "KERNEL_BACKEND",
]


def reference_params_path():
    """Path of the packaged reference-device parameter file."""
    return resources.files("fluxdiode").joinpath("data/reference.params")
