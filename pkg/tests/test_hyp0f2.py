"""Series evaluation of 0F2 against an arbitrary-precision oracle (mpmath)."""

import mpmath
import numpy as np
import pytest

from fluxdiode._kernels import BACKEND, hyp0f2, load_backend
from fluxdiode.errors import ParameterError, SeriesError

mpmath.mp.dps = 40


def oracle(a, b, z):
    v = mpmath.hyper([], [mpmath.mpc(a), mpmath.mpc(b)], mpmath.mpc(z))
    return complex(v)


def random_cases(count, seed=20240801):
    """Complex arguments covering the regime the transmission formula visits."""
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(count):
        a = complex(rng.uniform(-5.0, 5.0), rng.uniform(-2.0, 2.0))
        b = complex(rng.uniform(-5.0, 5.0), rng.uniform(-2.0, 2.0))
        z = complex(rng.uniform(-50.0, 100.0), rng.uniform(-20.0, 20.0))
        # keep a safe distance from Pochhammer poles on the real axis
        if min(abs(a.imag), abs(a - round(a.real))) < 1e-2 and a.real <= 0:
            a += 0.5j
        if min(abs(b.imag), abs(b - round(b.real))) < 1e-2 and b.real <= 0:
            b += 0.5j
        cases.append((a, b, z))
    return cases


def test_empty_series_is_one():
    for a, b in [(1.0, 1.0), (2.5 + 1j, -0.3 + 2j), (0.7, 12.0)]:
        assert hyp0f2(a, b, 0.0) == 1.0 + 0j


def test_cubed_factorial_series():
    # 0F2(;1,1;1) = sum 1/(n!)^3, brute force
    import math
    expected = sum(1.0 / math.factorial(n) ** 3 for n in range(12))
    value = hyp0f2(1.0, 1.0, 1.0)
    assert value.real == pytest.approx(expected, rel=1e-14)
    assert value.real == pytest.approx(2.1297025489833064, rel=1e-13)
    assert value.imag == 0.0


def test_complex_case_against_oracle():
    a, b, z = 1.0 + 1.0j, 1.0 - 1.0j, 0.5
    ref = oracle(a, b, z)
    val = hyp0f2(a, b, z)
    assert abs(val - ref) <= 1e-12 * abs(ref)


def test_random_cases_against_oracle():
    for a, b, z in random_cases(200):
        ref = oracle(a, b, z)
        val = hyp0f2(a, b, z)
        assert abs(val - ref) <= 1e-10 * max(abs(ref), 1e-300), (a, b, z)


@pytest.mark.parametrize("a,b", [(0.0, 1.0), (-3.0, 1.0), (1.0, -1.0)])
def test_pole_arguments_rejected(a, b):
    with pytest.raises(ParameterError):
        hyp0f2(a, b, 1.0)


def test_near_pole_arguments_still_fine():
    # small imaginary offsets from a pole are legal and finite
    val = hyp0f2(-2.0 + 1e-3j, 1.0, 0.5)
    ref = oracle(-2.0 + 1e-3j, 1.0, 0.5)
    assert abs(val - ref) <= 1e-9 * abs(ref)


def test_cap_hit_reports_partial_sum():
    with pytest.raises(SeriesError) as err:
        hyp0f2(1.0, 1.0, 1e30)
    assert err.value.last_term is not None


def test_backends_agree():
    if BACKEND != "cython":
        pytest.skip("compiled backend not built")
    core = load_backend("cython")
    fallback = load_backend("python")
    for a, b, z in random_cases(60, seed=7):
        x = core.hyp0f2(a, b, z)
        y = fallback.hyp0f2(a, b, z)
        assert abs(x - y) <= 1e-12 * max(abs(x), 1e-300)


def test_backend_rows_agree():
    if BACKEND != "cython":
        pytest.skip("compiled backend not built")
    core = load_backend("cython")
    fallback = load_backend("python")
    deltas = np.linspace(-2e7, 2e7, 501)
    for zeta in (0.0, 1e-3, 0.05, 0.2):
        x = core.duffing_magsq(deltas, 1.1e6, 160e3, 430e3, -11.5e6, zeta)
        y = fallback.duffing_magsq(deltas, 1.1e6, 160e3, 430e3, -11.5e6, zeta)
        assert np.allclose(x, y, rtol=1e-12, atol=0.0)
