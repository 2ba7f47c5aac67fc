# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner kernels: 0F2 power series and Duffing transmission rows.

Twin of fluxdiode._kernels._fallback; same series, same stopping rule.
"""

import numpy as np

from libc.math cimport floor, isfinite

from fluxdiode.errors import ParameterError, SeriesError

cdef double TERM_TOL = 1e-15
cdef int MAX_TERMS = 10000


cdef inline bint _is_pole(double complex x) noexcept:
    return x.imag == 0.0 and x.real <= 0.0 and x.real == floor(x.real)


cdef int _series(double complex a, double complex b, double complex z,
                 double complex *out, double *last) noexcept:
    """Sum the series into *out.

    Returns 0 on convergence, 1 on term-cap hit, 2 on double overflow;
    *last carries the magnitude of the final term.
    """
    cdef double complex s = 1.0
    cdef double complex t = 1.0
    cdef double at
    cdef int n = 0
    cdef int small = 0
    while n < MAX_TERMS:
        t = t * z / ((a + <double>n) * (b + <double>n) * (<double>n + 1.0))
        s = s + t
        n += 1
        at = abs(t)
        if not isfinite(at) or not isfinite(abs(s)):
            out[0] = s
            last[0] = at
            return 2
        if at <= TERM_TOL * abs(s):
            small += 1
            if small >= 2:
                out[0] = s
                last[0] = at
                return 0
        else:
            small = 0
    out[0] = s
    last[0] = abs(t)
    return 1


def hyp0f2(a, b, z):
    """Generalized hypergeometric 0F2(;a,b;z) by direct series summation."""
    cdef double complex ca = a
    cdef double complex cb = b
    cdef double complex cz = z
    cdef double complex out
    cdef double last
    cdef int status
    if _is_pole(ca) or _is_pole(cb):
        raise ParameterError(
            f"hyp0f2 parameter is a non-positive integer (Pochhammer pole): "
            f"a={complex(ca)}, b={complex(cb)}"
        )
    status = _series(ca, cb, cz, &out, &last)
    if status:
        reason = ("overflowed double precision" if status == 2
                  else f"did not converge within {MAX_TERMS} terms")
        raise SeriesError(
            f"hyp0f2 series {reason} (last term magnitude {last:.3e})",
            partial_sum=complex(out),
            last_term=last,
        )
    return complex(out)


def duffing_magsq(deltas, double kappa_h, double kappa_h1, double kappa_h2,
                  double kerr, double zeta):
    """Kerr-resonator power transmission |S|^2 over an array of detunings.

    deltas are probe detunings from the shifted resonance in Hz; kappa and
    kerr are /2pi rates in Hz; zeta is the dimensionless drive strength
    2 kappa_h^2 P_in / (9 K^2 P*).
    """
    cdef double[::1] d = np.ascontiguousarray(deltas, dtype=np.float64)
    out_arr = np.empty(d.shape[0], dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    cdef double complex b, a_den, num, den, cz = zeta
    cdef double lorentz, last
    cdef int bad
    for i in range(d.shape[0]):
        b = -(d[i] + 0.5j * kappa_h) / kerr
        a_den = -(d[i] - 0.5j * kappa_h) / kerr
        if _is_pole(a_den) or _is_pole(1.0 + a_den) or _is_pole(b):
            raise ParameterError(
                f"hyp0f2 pole at detuning {d[i]!r} Hz (kappa_h must be > 0)"
            )
        bad = _series(1.0 + a_den, b, cz, &num, &last)
        bad |= _series(a_den, b, cz, &den, &last)
        if bad:
            raise SeriesError(
                f"hyp0f2 series did not converge at detuning {d[i]!r} Hz",
                partial_sum=None,
                last_term=None,
            )
        lorentz = kappa_h1 * kappa_h2 / (4.0 * d[i] * d[i] + kappa_h * kappa_h)
        out[i] = lorentz * abs(num) ** 2 / abs(den) ** 2
    return out_arr
