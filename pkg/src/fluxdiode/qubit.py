"""Flux-qubit spectrum in the two-island charge (plane-wave) basis.

The loop holds three Josephson junctions: two nominally equal big ones
and a smaller one scaled by alpha.  In the phase variables (phi1, phi2)
of the big junctions the potential is

    U/E_J = 2 + alpha - cos(phi1) - cos(phi2)
            - alpha cos(2 pi flux + phi1 - phi2)

and the kinetic term comes from the inverse island capacitance matrix:
the island totals C_G1, C_G2 (encoded through the single-electron
charging energies ec1, ec2) on the diagonal, with the shared big junction
providing the off-diagonal element.  The big junctions being nominally
identical and ground capacitance small, that shared capacitance is taken
as half of island 2's total.

Charge offsets are fixed to zero.  Energies are handled as frequencies
throughout (E/h, Hz).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from fluxdiode.constants import E_CHARGE, H_PLANCK
from fluxdiode.errors import ParameterError, ResourceLimitError
from fluxdiode.hybrid import coupled_mode_frequencies
from fluxdiode.params import FluxQubitParams

DEFAULT_BASIS = 12
CONVERGENCE_TOL_HZ = 1e6
_MAX_MATRIX_BYTES = 4 << 30


def _charging_matrix(q: FluxQubitParams) -> np.ndarray:
    """Inverse-capacitance charging matrix in Hz (per Cooper-pair basis)."""
    c1 = E_CHARGE ** 2 / (2.0 * H_PLANCK * q.ec1)
    c2 = E_CHARGE ** 2 / (2.0 * H_PLANCK * q.ec2)
    c_shared = 0.5 * c2
    det = c1 * c2 - c_shared ** 2
    if det <= 0.0:
        raise ParameterError(
            "island capacitance matrix not positive definite (needs ec1 < 4 ec2)")
    inv = np.array([[c2, c_shared], [c_shared, c1]]) / det
    return E_CHARGE ** 2 / (2.0 * H_PLANCK) * inv


def qubit_hamiltonian(q: FluxQubitParams, n: int) -> np.ndarray:
    """Hamiltonian matrix on the charge basis n1, n2 in [-n, n], in Hz.

    The Josephson terms couple charge states shifted by one: the big
    junctions shift n1 or n2 with weight -E_J/2, the small junction
    shifts the pair (n1, n2) -> (n1+1, n2-1) with weight -alpha E_J/2
    and flux phase exp(2j pi flux).
    """
    if n < 1:
        raise ParameterError("basis half-width must be at least 1")
    dim = 2 * n + 1
    nbytes = (dim * dim) ** 2 * 16
    if nbytes > _MAX_MATRIX_BYTES:
        raise ResourceLimitError(
            f"basis n={n} needs a {dim * dim}x{dim * dim} complex matrix "
            f"({nbytes / 2**30:.1f} GiB); reduce n")
    ec = _charging_matrix(q)
    charge = np.arange(-n, n + 1, dtype=float)
    ident = np.eye(dim)
    ndiag = np.diag(charge)
    nsq = np.diag(charge ** 2)
    shift = np.diag(np.ones(dim - 1), k=-1)   # e^{i phi} in the charge basis

    kinetic = 4.0 * (ec[0, 0] * np.kron(nsq, ident)
                     + ec[1, 1] * np.kron(ident, nsq)
                     + 2.0 * ec[0, 1] * np.kron(ndiag, ndiag))

    cos_phi = 0.5 * (shift + shift.T)
    h = kinetic.astype(complex)
    h -= q.ej * (np.kron(cos_phi, ident) + np.kron(ident, cos_phi))
    phase = np.exp(2j * np.pi * q.flux)
    h -= 0.5 * q.alpha * q.ej * (phase * np.kron(shift, shift.T)
                                 + np.conj(phase) * np.kron(shift.T, shift))
    h += (2.0 + q.alpha) * q.ej * np.eye(dim * dim)
    return h


def _lowest_levels(q: FluxQubitParams, n: int, count: int = 3) -> np.ndarray:
    h = qubit_hamiltonian(q, n)
    return sla.eigh(h, subset_by_index=(0, count - 1), eigvals_only=True,
                    check_finite=False)


def transition_frequencies(q: FluxQubitParams, n: int = DEFAULT_BASIS) -> tuple[float, float]:
    """(f01, f12) from the three lowest eigenvalues, in Hz."""
    w = _lowest_levels(q, n)
    return float(w[1] - w[0]), float(w[2] - w[1])


def f01(q: FluxQubitParams, n: int = DEFAULT_BASIS) -> float:
    """Qubit transition frequency (difference of the two lowest levels)."""
    w = _lowest_levels(q, n, count=2)
    return float(w[1] - w[0])


def converged_f01(q: FluxQubitParams, n: int = DEFAULT_BASIS) -> tuple[float, bool]:
    """f01 at basis n plus a flag telling whether doubling n moves it < 1 MHz."""
    value = f01(q, n)
    check = f01(q, 2 * n)
    return value, abs(value - check) < CONVERGENCE_TOL_HZ


@dataclass(frozen=True)
class QubitSpectrum:
    """f01 and f12 over a flux grid, with the basis size used."""

    flux: np.ndarray
    f01: np.ndarray
    f12: np.ndarray
    basis_size: int
    converged: bool


def spectrum_curve(q: FluxQubitParams, flux_grid, n: int = DEFAULT_BASIS,
                   check_convergence: bool = True) -> QubitSpectrum:
    """Sweep the flux and collect the two lowest transitions.

    The convergence flag is established once, at the grid point closest
    to the degeneracy point (the smallest gap converges last), by
    comparing against a doubled basis.  Points are independent, so the
    sweep is trivially parallelizable; evaluation here is sequential to
    keep results reproducible bit for bit.
    """
    flux_grid = np.asarray(flux_grid, dtype=float)
    f01s = np.empty(flux_grid.size)
    f12s = np.empty(flux_grid.size)
    for i, flux in enumerate(flux_grid):
        f01s[i], f12s[i] = transition_frequencies(
            FluxQubitParams(q.ej, q.alpha, q.ec1, q.ec2, float(flux)), n)
    converged = True
    if check_convergence and flux_grid.size:
        worst = flux_grid[np.argmin(np.abs((flux_grid % 1.0) - 0.5))]
        _, converged = converged_f01(
            FluxQubitParams(q.ej, q.alpha, q.ec1, q.ec2, float(worst)), n)
    return QubitSpectrum(flux=flux_grid, f01=f01s, f12=f12s,
                         basis_size=n, converged=converged)


def avoided_crossing(f_mode: float, f01_value: float, g: float) -> tuple[float, float]:
    """Branch frequencies (f_plus, f_minus) of a qubit-mode anti-crossing.

    Same two-coupled-oscillator form as the resonator hybridization:
    f_pm = sqrt((f_i^2 + f01^2 +/- sqrt((f_i^2 - f01^2)^2
                 + 16 g^2 f_i f01)) / 2).
    """
    if f_mode <= 0.0 or f01_value <= 0.0:
        raise ParameterError("mode and qubit frequencies must be positive")
    if g < 0.0:
        raise ParameterError("coupling must be non-negative")
    return coupled_mode_frequencies(f01_value, f_mode, g)
