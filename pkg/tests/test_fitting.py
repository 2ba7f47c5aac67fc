import numpy as np
import pytest

from fluxdiode.errors import DataError
from fluxdiode.fitting import (
    fit_avoided_crossing,
    fit_duffing_map,
    fit_linear_lineshape,
    fit_qubit_band,
    synth_crossing,
    synth_duffing_map,
    synth_linear_sweeps,
    synth_qubit_band,
)
from fluxdiode.params import FluxQubitParams, PowerLevel
from fluxdiode.transmission import duffing_transmission, transmission_map

REF_QUBIT = dict(ej=3.75e10, alpha=0.632, ec1=1.978e9, ec2=1.614e9, flux=0.5)


def lineshape_grid(model, n=600):
    span = 8.0 * model.kappa_h
    return np.linspace(model.f_high - span, model.f_high + span, n)


# ------------------------------------------------------------ linear fit

def test_linear_lineshape_noiseless(fitted_model):
    model = fitted_model.replace(kappa_h=787e3)
    freq = lineshape_grid(model)
    s41, s32 = synth_linear_sweeps(model, freq, sigma=0.0, seed=0)
    result = fit_linear_lineshape(freq, s41, s32, model.f1, model.f2)
    assert result.converged
    assert result.params["kappa_h1"] == pytest.approx(160e3, rel=1e-6)
    assert result.params["kappa_h2"] == pytest.approx(430e3, rel=1e-6)
    assert result.params["kappa_h"] == pytest.approx(787e3, rel=1e-6)
    assert result.params["f_high"] == pytest.approx(model.f_high, abs=1.0)


def test_linear_lineshape_with_noise(fitted_model):
    model = fitted_model.replace(kappa_h=787e3)
    freq = lineshape_grid(model)
    s41, s32 = synth_linear_sweeps(model, freq, sigma=0.005, seed=11)
    result = fit_linear_lineshape(freq, s41, s32, model.f1, model.f2)
    assert result.converged
    assert result.params["kappa_h1"] == pytest.approx(160e3, rel=0.05)
    assert result.params["kappa_h2"] == pytest.approx(430e3, rel=0.05)
    assert result.params["kappa_h"] == pytest.approx(787e3, rel=0.05)
    assert result.stderr["kappa_h1"] > 0.0


def test_linear_lineshape_flat_data_rejected(fitted_model):
    freq = lineshape_grid(fitted_model)
    rng = np.random.default_rng(5)
    flat = 1.0 + rng.normal(0.0, 0.005, freq.size)
    with pytest.raises(DataError, match="dip"):
        fit_linear_lineshape(freq, flat, flat.copy(), fitted_model.f1,
                             fitted_model.f2)


def test_linear_lineshape_span_check(fitted_model):
    model = fitted_model.replace(kappa_h=787e3)
    freq = np.linspace(model.f_high - 1.5e6, model.f_high + 1.5e6, 200)
    s41, s32 = synth_linear_sweeps(model, freq, sigma=0.0, seed=0)
    with pytest.raises(DataError, match="5 linewidths"):
        fit_linear_lineshape(freq, s41, s32, model.f1, model.f2)


def test_uncertainty_shrinks_with_points(fitted_model):
    model = fitted_model.replace(kappa_h=787e3)
    err = []
    for n in (50, 200, 800):
        freq = lineshape_grid(model, n=n)
        s41, s32 = synth_linear_sweeps(model, freq, sigma=0.01, seed=21)
        result = fit_linear_lineshape(freq, s41, s32, model.f1, model.f2)
        err.append(result.stderr["kappa_h1"])
    assert err[0] > err[1] > err[2]


def test_fit_determinism(fitted_model):
    model = fitted_model.replace(kappa_h=787e3)
    freq = lineshape_grid(model)
    s41, s32 = synth_linear_sweeps(model, freq, sigma=0.005, seed=3)
    a = fit_linear_lineshape(freq, s41, s32, model.f1, model.f2)
    b = fit_linear_lineshape(freq, s41, s32, model.f1, model.f2)
    assert a.params == b.params
    assert a.rss == b.rss


# ------------------------------------------------- avoided-crossing fit

def test_crossing_zero_jitter_exact():
    f01_vals = np.linspace(6.3e9, 7.25e9, 15)
    f01v, fobs, branch = synth_crossing(6.762e9, 1.75e8, f01_vals,
                                        jitter_hz=0.0, seed=0)
    result = fit_avoided_crossing(f01v, fobs, branch)
    assert result.converged
    assert result.params["g"] == pytest.approx(1.75e8, rel=1e-9)
    assert result.params["f_mode"] == pytest.approx(6.762e9, rel=1e-9)


def test_crossing_high_mode_with_jitter():
    f01_vals = np.linspace(6.3e9, 7.25e9, 17)
    f01v, fobs, branch = synth_crossing(6.762e9, 1.75e8, f01_vals,
                                        jitter_hz=1e6, seed=42)
    result = fit_avoided_crossing(f01v, fobs, branch)
    assert result.params["g"] == pytest.approx(1.75e8, rel=0.03)


def test_crossing_low_mode_small_coupling():
    f01_vals = np.linspace(6.027e9 - 8e6, 6.027e9 + 8e6, 21)
    f01v, fobs, branch = synth_crossing(6.027e9, 1e6, f01_vals,
                                        jitter_hz=1e5, seed=9)
    result = fit_avoided_crossing(f01v, fobs, branch)
    assert result.params["g"] == pytest.approx(1e6, rel=0.10)


def test_crossing_single_branch_ill_posed():
    f01_vals = np.linspace(6.3e9, 7.25e9, 9)
    f01v, fobs, branch = synth_crossing(6.762e9, 1.75e8, f01_vals,
                                        jitter_hz=0.0, seed=0)
    upper = branch == 1
    with pytest.raises(DataError, match="both branches"):
        fit_avoided_crossing(f01v[upper], fobs[upper], branch[upper])


# -------------------------------------------------------- qubit-band fit

def test_qubit_band_noiseless():
    q = FluxQubitParams(**REF_QUBIT)
    flux = np.linspace(0.40, 0.47, 11)
    band = synth_qubit_band(q, flux, sigma_hz=0.0, seed=0, basis=8)
    result = fit_qubit_band(flux, band, ec1=q.ec1, ec2=q.ec2, basis=8)
    assert result.converged
    assert result.params["alpha"] == pytest.approx(0.632, abs=2e-3)
    assert result.params["ej"] == pytest.approx(3.75e10, rel=2e-3)


def test_qubit_band_with_noise():
    q = FluxQubitParams(**REF_QUBIT)
    flux = np.linspace(0.40, 0.47, 12)
    band = synth_qubit_band(q, flux, sigma_hz=10e6, seed=17, basis=8)
    result = fit_qubit_band(flux, band, ec1=q.ec1, ec2=q.ec2, basis=8)
    assert result.params["alpha"] == pytest.approx(0.632, abs=0.01)
    assert result.params["ej"] == pytest.approx(3.75e10, rel=0.02)


def test_qubit_band_second_fixture_alpha_half():
    q = FluxQubitParams(**{**REF_QUBIT, "alpha": 0.5})
    flux = np.linspace(0.40, 0.47, 11)
    band = synth_qubit_band(q, flux, sigma_hz=0.0, seed=0, basis=8)
    result = fit_qubit_band(flux, band, ec1=q.ec1, ec2=q.ec2, basis=8)
    assert result.params["alpha"] == pytest.approx(0.5, abs=0.01)


def test_qubit_band_needs_points():
    with pytest.raises(DataError, match="10 flux points"):
        fit_qubit_band(np.linspace(0.4, 0.47, 5), np.ones(5), 2e9, 2e9)


def test_qubit_band_needs_span():
    flux = np.full(12, 0.45) + np.linspace(0, 1e-3, 12)
    with pytest.raises(DataError, match="narrow"):
        fit_qubit_band(flux, np.ones(12), 2e9, 2e9)


# ------------------------------------------------------- duffing map fit

@pytest.fixture(scope="module")
def duffing_maps(fitted_model):
    freq = fitted_model.f_res + np.linspace(-5e6, 5e6, 201)
    powers = np.arange(-122.0, -99.0, 1.0)
    m31 = transmission_map(fitted_model, freq, powers, "31")
    m42 = transmission_map(fitted_model, freq, powers, "42")
    return m31, m42


def test_duffing_fit_direction_1(duffing_maps, fitted_model):
    result = fit_duffing_map(duffing_maps[0], "31")
    assert result.converged
    assert abs(result.params["pstar_dbm"] - (-112.0)) < 1.0
    assert result.params["kerr"] == pytest.approx(-11.5e6, rel=0.15)
    assert result.params["kappa_h"] == pytest.approx(1.1e6, rel=0.05)
    assert result.params["f_res"] == pytest.approx(fitted_model.f_res, abs=1e5)


def test_duffing_fit_direction_2(duffing_maps):
    result = fit_duffing_map(duffing_maps[1], "42")
    assert result.converged
    assert abs(result.params["pstar_dbm"] - (-117.0)) < 1.0
    assert result.params["kerr"] == pytest.approx(-11.5e6, rel=0.15)


def test_duffing_fit_threshold_ratio(duffing_maps):
    r1 = fit_duffing_map(duffing_maps[0], "31")
    r2 = fit_duffing_map(duffing_maps[1], "42")
    ratio = PowerLevel.from_dbm(r1.params["pstar_dbm"]).watts \
        / PowerLevel.from_dbm(r2.params["pstar_dbm"]).watts
    assert ratio == pytest.approx(3.2, abs=0.3)


def test_duffing_fit_no_splitting(fitted_model):
    freq = fitted_model.f_res + np.linspace(-5e6, 5e6, 101)
    powers = np.arange(-135.0, -120.0, 1.0)   # everything below threshold
    smap = transmission_map(fitted_model, freq, powers, "31")
    result = fit_duffing_map(smap, "31")
    assert not result.converged
    assert result.params["pstar_dbm_lower_bound"] == -121.0
    assert "bounded from below" in result.message


def test_duffing_fit_needs_power_axis(fitted_model):
    freq = fitted_model.f_res + np.linspace(-5e6, 5e6, 11)
    smap = transmission_map(fitted_model, freq, [-110.0], "31")
    flux_map = smap.__class__(axis1=smap.axis1, axis2=smap.axis2,
                              axis2_kind="flux", values31=smap.values31)
    with pytest.raises(DataError, match="power axis"):
        fit_duffing_map(flux_map, "31")
    with pytest.raises(DataError, match="no values"):
        fit_duffing_map(smap, "42")


# ------------------------------------------------------------- synthesis

def test_synth_zero_noise_is_exact(fitted_model):
    freq = fitted_model.f_res + np.linspace(-3e6, 3e6, 51)
    smap = synth_duffing_map(fitted_model, freq, [-110.0], "31",
                             sigma=0.0, seed=123)
    exact = duffing_transmission(fitted_model, freq,
                                 PowerLevel.from_dbm(-110.0), "31")
    assert np.array_equal(smap.values31[:, 0], exact)


def test_synth_seed_determinism(fitted_model):
    freq = fitted_model.f_res + np.linspace(-3e6, 3e6, 51)
    a = synth_duffing_map(fitted_model, freq, [-110.0], "31", sigma=1e-4, seed=7)
    b = synth_duffing_map(fitted_model, freq, [-110.0], "31", sigma=1e-4, seed=7)
    assert np.array_equal(a.values31, b.values31)
    c = synth_duffing_map(fitted_model, freq, [-110.0], "31", sigma=1e-4, seed=8)
    assert not np.array_equal(a.values31, c.values31)


def test_synth_mean_converges_to_model(fitted_model):
    freq = np.array([fitted_model.f_res + 0.4e6])
    sigma = 1e-3
    exact = duffing_transmission(fitted_model, freq,
                                 PowerLevel.from_dbm(-110.0), "31")[0]
    draws = [
        synth_duffing_map(fitted_model, freq, [-110.0], "31",
                          sigma=sigma, seed=seed).values31[0, 0]
        for seed in range(1000)
    ]
    assert abs(np.mean(draws) - exact) < 3.0 * sigma / np.sqrt(1000.0)


def test_synth_rejects_negative_noise(fitted_model):
    with pytest.raises(DataError):
        synth_linear_sweeps(fitted_model, np.array([6.7e9]), sigma=-0.1, seed=0)
