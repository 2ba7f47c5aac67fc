"""Least-squares parameter recovery with synthetic-data round-trip support.

Every fit here follows the same recipe: data-driven initialization
heuristics, a bounded trust-region least-squares refinement with
numerically differenced Jacobians (the Duffing objective runs through
0F2, so there is no cheap analytic gradient), and parameter
uncertainties taken from the residual curvature at the optimum.  Fits
are deterministic given the data and initialization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from fluxdiode import qubit as qubit_mod
from fluxdiode import transmission as trans
from fluxdiode._kernels import duffing_magsq
from fluxdiode.errors import ConvergenceError, DataError
from fluxdiode.params import FluxQubitParams, PowerLevel
from fluxdiode.qubit import avoided_crossing
from fluxdiode.transmission import KerrModel, SpectrumMap


@dataclass
class FitResult:
    """Estimated parameters with convergence diagnostics.

    stderr holds per-parameter uncertainties estimated from the curvature
    of the residuals at the optimum (zero when the fit is exact).
    """

    params: dict
    rss: float
    n_iter: int
    converged: bool
    stderr: dict = field(default_factory=dict)
    message: str = ""


def _finish(res, names) -> FitResult:
    """Package a scipy least_squares result, with curvature uncertainties."""
    values = dict(zip(names, res.x))
    rss = float(2.0 * res.cost)
    dof = max(res.fun.size - res.x.size, 1)
    stderr = {}
    try:
        jtj = res.jac.T @ res.jac
        cov = np.linalg.pinv(jtj) * rss / dof
        stderr = {n: float(np.sqrt(max(cov[i, i], 0.0)))
                  for i, n in enumerate(names)}
    except (np.linalg.LinAlgError, ValueError):
        pass
    return FitResult(params=values, rss=rss, n_iter=int(res.nfev),
                     converged=bool(res.success), stderr=stderr,
                     message=res.message)


def _noise_estimate(y: np.ndarray) -> float:
    """Robust per-point noise scale from first differences."""
    d = np.diff(y)
    return 1.4826 * float(np.median(np.abs(d - np.median(d)))) / np.sqrt(2.0)


# ---------------------------------------------------------------- linear fit

def fit_linear_lineshape(freq, s41sq, s32sq, f1: float, f2: float) -> FitResult:
    """Joint fit of the zero-flux |S41|^2, |S32|^2 dips.

    Recovers kappa_h1, kappa_h2, the total kappa_h and the resonance
    f_high.  The internal loss enters as a free non-negative parameter so
    kappa_h >= kappa_h1 + kappa_h2 is enforced structurally.
    """
    freq = np.asarray(freq, dtype=float)
    s41 = np.asarray(s41sq, dtype=float)
    s32 = np.asarray(s32sq, dtype=float)
    if freq.shape != s41.shape or freq.shape != s32.shape:
        raise DataError("sweeps must share one frequency grid")

    depth = 1.0 - min(s41.min(), s32.min())
    noise = max(_noise_estimate(s41), _noise_estimate(s32))
    if depth < 1e-9 or depth < 8.0 * noise:
        raise DataError("no resonance dip detected (flat or noise-dominated data)")

    deep = s41 if s41.min() <= s32.min() else s32
    f_high0 = freq[np.argmin(deep)]
    half = 1.0 - (1.0 - deep.min()) / 2.0
    below = np.where(deep <= half)[0]
    kappa0 = max(freq[below[-1]] - freq[below[0]], 2.0 * (freq[1] - freq[0]))
    if freq[-1] - freq[0] < 5.0 * kappa0:
        raise DataError("frequency span must cover at least 5 linewidths")

    def model(theta):
        kh1, kh2, khi, f_high = theta
        m = KerrModel(
            f_res=f_high, kerr=0.0, kappa_h=kh1 + kh2 + khi,
            kappa_h1=kh1, kappa_h2=kh2,
            pstar1=PowerLevel.from_watts(1.0), pstar2=PowerLevel.from_watts(1.0),
            f_high=f_high, f1=f1, f2=f2)
        return np.concatenate([
            trans.linear_transmission(m, freq, "41"),
            trans.linear_transmission(m, freq, "32"),
        ])

    data = np.concatenate([s41, s32])

    def resid(theta):
        return model(theta) - data

    theta0 = [kappa0 / 3.0, kappa0 / 3.0, kappa0 / 3.0, f_high0]
    eps = 1e-3  # Hz; keeps rates strictly positive
    res = least_squares(
        resid, theta0,
        bounds=([eps, eps, 0.0, freq[0]], [np.inf, np.inf, np.inf, freq[-1]]),
        x_scale=[kappa0, kappa0, kappa0, kappa0], max_nfev=2000)
    if not res.success:
        raise ConvergenceError(f"linear lineshape fit did not converge: {res.message}")

    out = _finish(res, ["kappa_h1", "kappa_h2", "kappa_hi", "f_high"])
    out.params["kappa_h"] = (out.params["kappa_h1"] + out.params["kappa_h2"]
                             + out.params["kappa_hi"])
    if out.stderr:
        out.stderr["kappa_h"] = float(np.sqrt(sum(
            out.stderr[k] ** 2 for k in ("kappa_h1", "kappa_h2", "kappa_hi"))))
    return out


# ---------------------------------------------------- avoided-crossing fit

def fit_avoided_crossing(f01_values, f_observed, branch) -> FitResult:
    """Fit one anti-crossing: coupling g and bare mode frequency f_mode.

    f01_values come from the flux-qubit eigensolver, f_observed are the
    measured branch frequencies, and branch is +1/-1 for the upper/lower
    branch of each point.  Data on a single branch cannot constrain both
    parameters and raises DataError.
    """
    f01v = np.asarray(f01_values, dtype=float)
    fobs = np.asarray(f_observed, dtype=float)
    br = np.asarray(branch, dtype=int)
    if not (f01v.shape == fobs.shape == br.shape):
        raise DataError("f01, observed frequencies and branch labels must align")
    if not set(np.unique(br)) <= {-1, 1}:
        raise DataError("branch labels must be +1 (upper) or -1 (lower)")
    if len(set(np.unique(br))) < 2:
        raise DataError("ill-posed: need points on both branches of the crossing")

    f_mode0 = float(np.median(fobs))
    g0 = max((fobs.max() - fobs.min()) / 8.0, 1e-8 * f_mode0)

    def resid(theta):
        g, f_mode = theta
        out = np.empty_like(fobs)
        for i in range(fobs.size):
            plus, minus = avoided_crossing(f_mode, f01v[i], g)
            out[i] = (plus if br[i] > 0 else minus) - fobs[i]
        return out

    res = least_squares(resid, [g0, f_mode0],
                        bounds=([0.0, 0.0], [np.inf, np.inf]),
                        x_scale=[max(g0, 1.0), f_mode0], max_nfev=1000)
    if not res.success:
        raise ConvergenceError(f"avoided-crossing fit did not converge: {res.message}")
    return _finish(res, ["g", "f_mode"])


# ---------------------------------------------------------- qubit-band fit

def _persistent_current_slope(alpha: float) -> float:
    """df01/dflux per unit ej, from the classical double-well tilt."""
    return 4.0 * np.pi * alpha * np.sqrt(1.0 - 1.0 / (4.0 * alpha ** 2))


def fit_qubit_band(flux, f01_data, ec1: float, ec2: float,
                   basis: int = 8) -> FitResult:
    """Recover alpha and ej from f01(flux) data away from crossings.

    The charging energies are held fixed.  A coarse alpha grid with a
    slope-based ej estimate seeds the refinement; each objective
    evaluation re-diagonalizes the qubit at every flux point.
    """
    flux = np.asarray(flux, dtype=float)
    data = np.asarray(f01_data, dtype=float)
    if flux.shape != data.shape:
        raise DataError("flux and f01 arrays must align")
    if flux.size < 10:
        raise DataError("qubit-band fit needs at least 10 flux points")
    if flux.max() - flux.min() < 0.01:
        raise DataError("flux range too narrow to constrain the band")

    def band(alpha, ej):
        out = np.empty(flux.size)
        for i, phi in enumerate(flux):
            out[i] = qubit_mod.f01(
                FluxQubitParams(ej=ej, alpha=alpha, ec1=ec1, ec2=ec2,
                                flux=float(phi)), basis)
        return out

    # slope of the band away from the degeneracy point, for the ej seed
    order = np.argsort(np.abs((flux % 1.0) - 0.5))[::-1]
    outer = order[: max(3, flux.size // 3)]
    slope = np.polyfit(flux[outer], data[outer], 1)[0]
    slope = abs(float(slope))

    best = None
    for alpha_try in np.arange(0.55, 0.86, 0.05):
        ej_try = slope / _persistent_current_slope(alpha_try)
        if not np.isfinite(ej_try) or ej_try <= 0:
            continue
        ssr = float(np.sum((band(alpha_try, ej_try) - data) ** 2))
        if best is None or ssr < best[0]:
            best = (ssr, alpha_try, ej_try)
    if best is None:
        raise ConvergenceError("could not seed the qubit-band fit")
    _, alpha0, ej0 = best

    def resid(theta):
        return band(theta[0], theta[1]) - data

    res = least_squares(resid, [alpha0, ej0],
                        bounds=([0.45, ej0 / 10.0], [0.95, ej0 * 10.0]),
                        x_scale=[0.05, ej0], max_nfev=400,
                        diff_step=[1e-4, 1e-4])
    if not res.success:
        raise ConvergenceError(f"qubit-band fit did not converge: {res.message}")
    return _finish(res, ["alpha", "ej"])


# --------------------------------------------------------- duffing-map fit

def detect_peaks(row: np.ndarray, min_separation_bins: int) -> list[int]:
    """Local maxima above 3x the row's median absolute deviation.

    Keeps the highest maxima first while enforcing the minimum bin
    separation; returns sorted indices.
    """
    row = np.asarray(row, dtype=float)
    idx = np.where((row[1:-1] > row[:-2]) & (row[1:-1] >= row[2:]))[0] + 1
    med = np.median(row)
    mad = np.median(np.abs(row - med))
    idx = [i for i in idx if row[i] > med + 3.0 * mad]
    kept: list[int] = []
    for i in sorted(idx, key=lambda i: -row[i]):
        if all(abs(i - j) >= min_separation_bins for j in kept):
            kept.append(i)
    return sorted(kept)


def fit_duffing_map(smap: SpectrumMap, direction: str) -> FitResult:
    """Fit a power-frequency transmission map to the full Kerr lineshape.

    Stage 1 reads initial values off the map: resonance and linewidth
    from the lowest-power row, the threshold from the lowest power whose
    row shows two separated maxima, and the Kerr sign from which side of
    the resonance carries the extra weight at high power.  Stage 2
    refines (amplitude, f_res, kappa_h, kerr, pstar) against every pixel.

    If no row splits, the map only bounds the threshold from below; the
    result is flagged unconverged and carries pstar_dbm_lower_bound
    instead of a point estimate.
    """
    values = smap.values31 if direction == "31" else smap.values42
    if values is None:
        raise DataError(f"map has no values for direction {direction!r}")
    if smap.axis2_kind != "power_dbm":
        raise DataError("duffing fit needs a power axis")
    freq = smap.axis1
    p_dbm = smap.axis2
    data = values.T  # rows indexed by power
    if freq.size > 1 and freq[0] > freq[-1]:
        freq = freq[::-1]
        data = data[:, ::-1]
    if p_dbm[0] > p_dbm[-1]:
        p_dbm = p_dbm[::-1]
        data = data[::-1]

    df = freq[1] - freq[0]
    row0 = data[0]
    f_res0 = float(freq[np.argmax(row0)])
    half = row0.max() / 2.0
    above = np.where(row0 >= half)[0]
    kappa0 = max(float(freq[above[-1]] - freq[above[0]]), 2.0 * df)
    min_sep = max(1, int(kappa0 / 2.0 / df))

    split_dbm = None
    for p, row in zip(p_dbm, data):
        if len(detect_peaks(row, min_sep)) >= 2:
            split_dbm = float(p)
            break
    if split_dbm is None:
        return FitResult(
            params={"pstar_dbm_lower_bound": float(p_dbm[-1])},
            rss=float("nan"), n_iter=0, converged=False,
            message="no peak splitting inside the power range; "
                    "threshold only bounded from below")

    row_hi = data[-1]
    centroid = float(np.sum(freq * row_hi) / np.sum(row_hi))
    # the steady-state weight sits on the opposite side of the Kerr pull
    kerr_sign = -1.0 if centroid > f_res0 else 1.0

    amp0 = float(row0.max() * kappa0 ** 2)
    p_watts = np.array([PowerLevel.from_dbm(float(p)).watts for p in p_dbm])

    def model(theta):
        amp, f_res, kappa_h, kerr, pstar_dbm = theta
        pstar_w = PowerLevel.from_dbm(pstar_dbm).watts
        k_eff = np.sqrt(amp)   # kernel prefactor k1*k2 = amp
        out = np.empty_like(data)
        for i, pw in enumerate(p_watts):
            zeta = 2.0 * kappa_h ** 2 * (pw / pstar_w) / (9.0 * kerr ** 2)
            out[i] = duffing_magsq(freq - f_res, kappa_h, k_eff, k_eff, kerr, zeta)
        return out

    def resid(theta):
        return (model(theta) - data).ravel()

    best = None
    for mag in (3.0, 10.0, 30.0):
        kerr0 = kerr_sign * mag * kappa0
        if kerr_sign < 0:
            kerr_lo, kerr_hi = -1e3 * kappa0, -1e-2 * kappa0
        else:
            kerr_lo, kerr_hi = 1e-2 * kappa0, 1e3 * kappa0
        theta0 = [amp0, f_res0, kappa0, kerr0, split_dbm - 0.5]
        res = least_squares(
            resid, theta0,
            bounds=([0.0, freq[0], kappa0 / 10.0, kerr_lo, p_dbm[0] - 30.0],
                    [np.inf, freq[-1], kappa0 * 10.0, kerr_hi, p_dbm[-1] + 30.0]),
            x_scale=[amp0, kappa0, kappa0, 10.0 * kappa0, 1.0],
            max_nfev=200)
        if best is None or res.cost < best.cost:
            best = res

    if not best.success:
        raise ConvergenceError(f"duffing map fit did not converge: {best.message}")
    out = _finish(best, ["amplitude", "f_res", "kappa_h", "kerr", "pstar_dbm"])
    return out


# -------------------------------------------------------------- synthesis

def synth_linear_sweeps(model: KerrModel, f_grid, sigma: float, seed: int):
    """Zero-flux |S41|^2, |S32|^2 curves plus Gaussian noise (linear domain)."""
    if sigma < 0.0:
        raise DataError("noise sigma must be non-negative")
    f_grid = np.asarray(f_grid, dtype=float)
    rng = np.random.default_rng(seed)
    s41 = trans.linear_transmission(model, f_grid, "41")
    s32 = trans.linear_transmission(model, f_grid, "32")
    if sigma > 0.0:
        s41 = s41 + rng.normal(0.0, sigma, f_grid.size)
        s32 = s32 + rng.normal(0.0, sigma, f_grid.size)
    return s41, s32


def synth_duffing_map(model: KerrModel, f_grid, p_dbm_grid, direction: str,
                      sigma: float, seed: int) -> SpectrumMap:
    """Forward Duffing map plus Gaussian noise, clipped at 0.

    Measured linear transmissions are non-negative, so negative noise
    excursions in the far tails are floored.
    """
    if sigma < 0.0:
        raise DataError("noise sigma must be non-negative")
    smap = trans.transmission_map(model, f_grid, p_dbm_grid, direction)
    if sigma == 0.0:
        return smap
    rng = np.random.default_rng(seed)
    key = "values31" if direction == "31" else "values42"
    values = getattr(smap, key) + rng.normal(0.0, sigma, getattr(smap, key).shape)
    values = np.clip(values, 0.0, 1.0)
    return SpectrumMap(axis1=smap.axis1, axis2=smap.axis2,
                       axis2_kind="power_dbm", **{key: values})


def synth_qubit_band(q: FluxQubitParams, flux_grid, sigma_hz: float, seed: int,
                     basis: int = 8) -> np.ndarray:
    """f01 over a flux grid from the eigensolver, plus Gaussian noise in Hz."""
    if sigma_hz < 0.0:
        raise DataError("noise sigma must be non-negative")
    flux_grid = np.asarray(flux_grid, dtype=float)
    rng = np.random.default_rng(seed)
    band = np.array([
        qubit_mod.f01(FluxQubitParams(q.ej, q.alpha, q.ec1, q.ec2, float(p)), basis)
        for p in flux_grid])
    if sigma_hz > 0.0:
        band = band + rng.normal(0.0, sigma_hz, band.shape)
    return band


def synth_crossing(f_mode: float, g: float, f01_values, jitter_hz: float,
                   seed: int):
    """Both branches of an anti-crossing with Gaussian jitter.

    Returns (f01, f_observed, branch) with each qubit frequency
    contributing one upper- and one lower-branch point.
    """
    if jitter_hz < 0.0:
        raise DataError("jitter must be non-negative")
    f01v = np.asarray(f01_values, dtype=float)
    rng = np.random.default_rng(seed)
    upper = np.empty(f01v.size)
    lower = np.empty(f01v.size)
    for i, q01 in enumerate(f01v):
        upper[i], lower[i] = avoided_crossing(f_mode, float(q01), g)
    fobs = np.concatenate([upper, lower])
    if jitter_hz > 0.0:
        fobs = fobs + rng.normal(0.0, jitter_hz, fobs.size)
    f01_out = np.concatenate([f01v, f01v])
    branch = np.concatenate([np.ones(f01v.size, dtype=int),
                             -np.ones(f01v.size, dtype=int)])
    return f01_out, fobs, branch
