"""Pure-numpy implementation of the hot kernels.

Used automatically when the compiled extension is not available; the two
backends implement the same series with the same stopping rule.
"""

from __future__ import annotations

import numpy as np

from fluxdiode.errors import ParameterError, SeriesError

TERM_TOL = 1e-15
MAX_TERMS = 10000


def _check_poles(a, b):
    for name, arr in (("a", a), ("b", b)):
        bad = (arr.imag == 0.0) & (arr.real <= 0.0) & (arr.real == np.floor(arr.real))
        if bad.any():
            raise ParameterError(
                f"hyp0f2 parameter {name!r} is a non-positive integer "
                f"(Pochhammer pole): {arr[bad].flat[0]}"
            )


def _hyp0f2_array(a, b, z):
    """0F2(;a,b;z) for arrays a, b and a common scalar z.

    Terms are accumulated by the recurrence t_{n+1} = t_n z/((a+n)(b+n)(n+1))
    until two consecutive terms fall below TERM_TOL relative to the partial
    sum, element-wise.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    _check_poles(a, b)
    s = np.ones(a.shape, dtype=complex)
    t = np.ones(a.shape, dtype=complex)
    small = np.zeros(a.shape, dtype=np.int64)
    active = np.ones(a.shape, dtype=bool)
    for n in range(MAX_TERMS):
        t = t * (z / ((a + n) * (b + n) * (n + 1.0)))
        s = np.where(active, s + t, s)
        if (active & ~(np.isfinite(t) & np.isfinite(s))).any():
            raise SeriesError(
                f"hyp0f2 series overflowed double precision at term {n + 1}",
                partial_sum=s,
                last_term=float("inf"),
            )
        converged = np.abs(t) <= TERM_TOL * np.abs(s)
        small = np.where(converged, small + 1, 0)
        active &= small < 2
        if not active.any():
            return s
    worst = float(np.max(np.abs(t[active])))
    raise SeriesError(
        f"hyp0f2 series did not converge within {MAX_TERMS} terms "
        f"(last term magnitude {worst:.3e})",
        partial_sum=s,
        last_term=worst,
    )


def hyp0f2(a: complex, b: complex, z: complex) -> complex:
    """Generalized hypergeometric 0F2(;a,b;z) by direct series summation."""
    out = _hyp0f2_array(np.array([a]), np.array([b]), complex(z))
    return complex(out[0])


def duffing_magsq(deltas, kappa_h, kappa_h1, kappa_h2, kerr, zeta):
    """Kerr-resonator power transmission |S|^2 over an array of detunings.

    deltas are probe detunings from the shifted resonance in Hz; kappa and
    kerr are /2pi rates in Hz; zeta is the dimensionless drive strength
    2 kappa_h^2 P_in / (9 K^2 P*).
    """
    deltas = np.asarray(deltas, dtype=float)
    b = -(deltas + 0.5j * kappa_h) / kerr
    a_den = -(deltas - 0.5j * kappa_h) / kerr
    num = _hyp0f2_array(1.0 + a_den, b, complex(zeta))
    den = _hyp0f2_array(a_den, b, complex(zeta))
    lorentz = kappa_h1 * kappa_h2 / (4.0 * deltas ** 2 + kappa_h ** 2)
    return lorentz * np.abs(num) ** 2 / np.abs(den) ** 2
