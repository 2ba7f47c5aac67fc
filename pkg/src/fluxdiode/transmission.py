"""Diode physics: Kerr/Duffing transmission, peak loci, rectification maps.

The device transmits through a single driven nonlinear mode.  Below the
threshold power the transmission is a Lorentzian of width kappa_h; above
it the peak splits in two and the split grows with drive power.  The full
steady-state lineshape is a ratio of generalized hypergeometric 0F2
functions evaluated by :mod:`fluxdiode._kernels`.

Direction handling is data, not duplicated code: "31" (port 1 -> port 3)
and "42" (port 2 -> port 4) select which threshold power scales the
drive; the Lorentzian prefactor kappa_h1*kappa_h2 is common to both.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from fluxdiode import hybrid
from fluxdiode._kernels import duffing_magsq
from fluxdiode._kernels import hyp0f2  # re-exported; public op of this module
from fluxdiode.errors import DataError, ParameterError
from fluxdiode.params import CircuitParams, PowerLevel

__all__ = [
    "KerrModel", "SpectrumMap", "hyp0f2",
    "duffing_transmission", "peak_frequencies", "peak_power",
    "linear_transmission", "rectification_ratio",
    "transmission_map", "rectification_map", "rectification_of_maps",
    "write_map_csv", "read_map_csv",
]

DIRECTIONS = ("31", "42")
DEFAULT_MASK_THRESHOLD = 1e-4   # linear |S|^2 units


@dataclass(frozen=True)
class KerrModel:
    """Effective single-mode Kerr model of the driven device.

    f_res is the dressed resonance (hybrid-mode frequency plus dispersive
    shift), kerr the Kerr coefficient (signed, Hz), kappa_h the total
    linewidth and kappa_h1/kappa_h2 the partial damping rates through the
    two feed lines.  pstar1/pstar2 are the splitting thresholds for the
    two drive directions.

    f_high, f1 and f2 are only needed by :func:`linear_transmission`
    (the zero-flux lineshapes) and may be omitted otherwise.
    """

    f_res: float
    kerr: float
    kappa_h: float
    kappa_h1: float
    kappa_h2: float
    pstar1: PowerLevel
    pstar2: PowerLevel
    f_high: Optional[float] = None
    f1: Optional[float] = None
    f2: Optional[float] = None

    def __post_init__(self):
        if self.kappa_h <= 0.0 or self.kappa_h1 < 0.0 or self.kappa_h2 < 0.0:
            raise ParameterError("damping rates must be positive")
        if self.kappa_h < (self.kappa_h1 + self.kappa_h2) * (1.0 - 1e-12):
            raise ParameterError(
                "kappa_h must be at least kappa_h1 + kappa_h2 "
                "(the difference is internal loss)"
            )
        if self.pstar1.watts <= 0.0 or self.pstar2.watts <= 0.0:
            raise ParameterError("threshold powers must be positive")

    def pstar(self, direction: str) -> PowerLevel:
        _check_direction(direction)
        return self.pstar1 if direction == "31" else self.pstar2

    def replace(self, **kwargs) -> "KerrModel":
        return replace(self, **kwargs)


def _check_direction(direction: str):
    if direction not in DIRECTIONS:
        raise ParameterError(f"direction must be one of {DIRECTIONS}, got {direction!r}")


def from_circuit(p: CircuitParams) -> KerrModel:
    """Build the Kerr model from circuit parameters via the theory chain.

    Threshold powers are the theoretical ones; measured devices typically
    need fitted thresholds instead (use :meth:`KerrModel.replace`).
    """
    mode = hybrid.derive_mode(p)
    return KerrModel(
        f_res=mode.f_high + p.chi,
        kerr=p.kerr,
        kappa_h=mode.kappa_h,
        kappa_h1=mode.kappa_h1,
        kappa_h2=mode.kappa_h2,
        pstar1=mode.pstar1,
        pstar2=mode.pstar2,
        f_high=mode.f_high,
        f1=p.f1,
        f2=p.f2,
    )


def drive_strength(model: KerrModel, p_in: PowerLevel, direction: str) -> float:
    """Dimensionless drive parameter zeta = 2 kappa_h^2 P_in / (9 K^2 P*)."""
    _check_direction(direction)
    if model.kerr == 0.0:
        raise ParameterError("Kerr coefficient is zero; use linear_transmission")
    ratio = p_in.watts / model.pstar(direction).watts
    return 2.0 * model.kappa_h ** 2 * ratio / (9.0 * model.kerr ** 2)


def duffing_transmission(model: KerrModel, f, p_in: PowerLevel, direction: str):
    """Power transmission |S|^2 of the driven Kerr mode.

    |S|^2 = kappa_h1 kappa_h2 / (4 D^2 + kappa_h^2)
            * |0F2(1 - (D - i kappa_h/2)/K, -(D + i kappa_h/2)/K, zeta)|^2
            / |0F2(  - (D - i kappa_h/2)/K, -(D + i kappa_h/2)/K, zeta)|^2

    with D = f - f_res.  Accepts a scalar frequency or an array; the
    result matches the input shape.
    """
    if p_in.watts <= 0.0:
        raise ParameterError("input power must be positive")
    zeta = drive_strength(model, p_in, direction)
    f_arr = np.atleast_1d(np.asarray(f, dtype=float))
    out = duffing_magsq(
        f_arr - model.f_res, model.kappa_h, model.kappa_h1, model.kappa_h2,
        model.kerr, zeta,
    )
    out = np.asarray(out)
    if np.isscalar(f) or np.ndim(f) == 0:
        return float(out[0])
    return out


def peak_frequencies(model: KerrModel, p_in: PowerLevel, direction: str) -> tuple[float, float]:
    """Closed-form peak positions (f_minus, f_plus) of the transmission.

    Above threshold:  f_pm = f_res +/- (sqrt(2)/3) kappa_h sqrt(P/P* - 1).
    At or below threshold the pair is degenerate at f_res (single peak).
    Valid in the kappa_h << |K| limit; cross-checked against numerical
    maxima of :func:`duffing_transmission` in the tests.
    """
    _check_direction(direction)
    if p_in.watts <= 0.0:
        raise ParameterError("input power must be positive")
    ratio = p_in.watts / model.pstar(direction).watts
    if ratio <= 1.0:
        return model.f_res, model.f_res
    split = math.sqrt(2.0) / 3.0 * model.kappa_h * math.sqrt(ratio - 1.0)
    return model.f_res - split, model.f_res + split


def peak_power(model: KerrModel, f: float, direction: str) -> PowerLevel:
    """Input power at which the transmission peaks for a given probe frequency.

    P_peak = P* (1 + 9 (f - f_res)^2 / (2 kappa_h^2)); the algebraic
    inverse of :func:`peak_frequencies` on the upper branch.
    """
    _check_direction(direction)
    delta = f - model.f_res
    factor = 1.0 + 9.0 * delta * delta / (2.0 * model.kappa_h ** 2)
    return PowerLevel.from_watts(model.pstar(direction).watts * factor)


def linear_transmission(model: KerrModel, f, which: str):
    """Zero-flux lineshapes |S41|^2 or |S32|^2 (qubit decoupled).

    |S41|^2 = 1 - (f_high^4/f1^4) (kappa_h1^2 + 2 kappa_h1 kappa_h2)
                  / (4 (f - f_high)^2 + kappa_h^2)

    and the analogous expression with indices swapped for |S32|^2.
    """
    if which not in ("41", "32"):
        raise ParameterError(f"which must be '41' or '32', got {which!r}")
    if model.f_high is None or model.f1 is None or model.f2 is None:
        raise DataError("linear_transmission needs f_high, f1 and f2 on the model")
    if which == "41":
        f_port, k_in, k_out = model.f1, model.kappa_h1, model.kappa_h2
    else:
        f_port, k_in, k_out = model.f2, model.kappa_h2, model.kappa_h1
    f_arr = np.asarray(f, dtype=float)
    delta = f_arr - model.f_high
    depth = (model.f_high / f_port) ** 4 * (k_in ** 2 + 2.0 * k_in * k_out)
    out = 1.0 - depth / (4.0 * delta ** 2 + model.kappa_h ** 2)
    if np.ndim(f) == 0:
        return float(out)
    return out


def rectification_ratio(s31sq, s42sq):
    """Transmission rectification ratio R = |s42 - s31| / (s42 + s31).

    Both inputs are linear |S|^2 values (scalars or arrays).  R is 0 for
    a reciprocal device and 1 for a perfect diode.  A point where both
    inputs vanish has no defined ratio and raises DataError.
    """
    s31 = np.asarray(s31sq, dtype=float)
    s42 = np.asarray(s42sq, dtype=float)
    if (s31 < 0.0).any() or (s42 < 0.0).any():
        raise DataError("transmissions must be non-negative")
    total = s31 + s42
    if (total == 0.0).any():
        raise DataError("rectification ratio undefined where both transmissions are zero")
    out = np.abs(s42 - s31) / total
    if np.ndim(s31sq) == 0 and np.ndim(s42sq) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class SpectrumMap:
    """2-D map of transmissions (and optionally their rectification ratio).

    axis1 is the frequency grid in Hz; axis2 is either a power grid in dBm
    or a flux grid in units of the flux quantum, as told by axis2_kind.
    Masked points are NaN.
    """

    axis1: np.ndarray
    axis2: np.ndarray
    axis2_kind: str
    values31: Optional[np.ndarray] = None
    values42: Optional[np.ndarray] = None
    ratio: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "axis1", np.asarray(self.axis1, dtype=float))
        object.__setattr__(self, "axis2", np.atleast_1d(np.asarray(self.axis2, dtype=float)))
        if self.axis2_kind not in ("power_dbm", "flux"):
            raise DataError(f"axis2_kind must be 'power_dbm' or 'flux', got {self.axis2_kind!r}")
        for name, ax in (("axis1", self.axis1), ("axis2", self.axis2)):
            d = np.diff(ax)
            if ax.size > 1 and not ((d > 0).all() or (d < 0).all()):
                raise DataError(f"{name} must be strictly monotone")
        shape = (self.axis1.size, self.axis2.size)
        for name in ("values31", "values42", "ratio"):
            v = getattr(self, name)
            if v is None:
                continue
            v = np.asarray(v, dtype=float)
            if v.shape != shape:
                raise DataError(f"{name} must have shape {shape}, got {v.shape}")
            object.__setattr__(self, name, v)
            finite = v[np.isfinite(v)]
            if finite.size and (finite.min() < -1e-9 or finite.max() > 1.0 + 1e-9):
                raise DataError(f"{name} outside [0, 1] beyond numerical tolerance")


def transmission_map(model: KerrModel, f_grid, p_dbm_grid, direction: str) -> SpectrumMap:
    """|S|^2 over a frequency x power grid for one propagation direction."""
    _check_direction(direction)
    f_grid = np.asarray(f_grid, dtype=float)
    p_grid = np.atleast_1d(np.asarray(p_dbm_grid, dtype=float))
    values = np.empty((f_grid.size, p_grid.size))
    for j, p in enumerate(p_grid):
        values[:, j] = duffing_transmission(
            model, f_grid, PowerLevel.from_dbm(float(p)), direction)
    key = "values31" if direction == "31" else "values42"
    return SpectrumMap(axis1=f_grid, axis2=p_grid, axis2_kind="power_dbm", **{key: values})


def rectification_map(model: KerrModel, f_grid, p_dbm,
                      threshold: float = DEFAULT_MASK_THRESHOLD) -> SpectrumMap:
    """Rectification-ratio map over frequency x power.

    R is computed pointwise from :func:`duffing_transmission` in both
    directions; points whose summed transmission falls below `threshold`
    are masked (NaN), suppressing the region that would be noise-dominated
    in a measurement.  threshold=0 disables masking.

    p_dbm may be a scalar (single-power map) or a grid.
    """
    f_grid = np.asarray(f_grid, dtype=float)
    p_grid = np.atleast_1d(np.asarray(p_dbm, dtype=float))
    s31 = np.empty((f_grid.size, p_grid.size))
    s42 = np.empty_like(s31)
    for j, p in enumerate(p_grid):
        power = PowerLevel.from_dbm(float(p))
        s31[:, j] = duffing_transmission(model, f_grid, power, "31")
        s42[:, j] = duffing_transmission(model, f_grid, power, "42")
    ratio = rectification_ratio(s31, s42)
    masked = np.where(s31 + s42 < threshold, np.nan, ratio)
    return SpectrumMap(axis1=f_grid, axis2=p_grid, axis2_kind="power_dbm",
                       values31=s31, values42=s42, ratio=masked)


def rectification_of_maps(map31: SpectrumMap, map42: SpectrumMap,
                          threshold: float = DEFAULT_MASK_THRESHOLD) -> SpectrumMap:
    """R map from two measured/calibrated transmission maps on equal grids."""
    if map31.values31 is None or map42.values42 is None:
        raise DataError("need values31 on the first map and values42 on the second")
    if not (np.array_equal(map31.axis1, map42.axis1)
            and np.array_equal(map31.axis2, map42.axis2)
            and map31.axis2_kind == map42.axis2_kind):
        raise DataError("maps must share the same grids")
    s31, s42 = map31.values31, map42.values42
    ratio = rectification_ratio(s31, s42)
    masked = np.where(s31 + s42 < threshold, np.nan, ratio)
    return SpectrumMap(axis1=map31.axis1, axis2=map31.axis2,
                       axis2_kind=map31.axis2_kind,
                       values31=s31, values42=s42, ratio=masked)


_QUANTITY_FIELDS = {"s31": "values31", "s42": "values42", "r": "ratio"}


def write_map_csv(path, smap: SpectrumMap, quantity: str):
    """Serialize one quantity of a map as CSV.

    Header row: `<quantity>/<axis2_kind>` followed by the axis2 values;
    each data row starts with the frequency.  Masked cells are empty.
    """
    field = _QUANTITY_FIELDS.get(quantity)
    if field is None:
        raise DataError(f"quantity must be one of {tuple(_QUANTITY_FIELDS)}, got {quantity!r}")
    values = getattr(smap, field)
    if values is None:
        raise DataError(f"map has no {quantity} values")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"{quantity}/{smap.axis2_kind}"]
                        + [repr(float(x)) for x in smap.axis2])
        for i, f in enumerate(smap.axis1):
            row = [repr(float(f))]
            for x in values[i]:
                row.append("" if not math.isfinite(x) else repr(float(x)))
            writer.writerow(row)


def read_map_csv(path) -> tuple[SpectrumMap, str]:
    """Inverse of :func:`write_map_csv`; returns (map, quantity)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or "/" not in rows[0][0]:
        raise DataError(f"{path}: not a spectrum-map CSV")
    quantity, _, axis2_kind = rows[0][0].partition("/")
    if quantity not in _QUANTITY_FIELDS:
        raise DataError(f"{path}: unknown quantity {quantity!r}")
    axis2 = np.array([float(x) for x in rows[0][1:]])
    axis1 = np.array([float(r[0]) for r in rows[1:]])
    values = np.array([[float(x) if x else np.nan for x in r[1:]] for r in rows[1:]])
    smap = SpectrumMap(axis1=axis1, axis2=axis2, axis2_kind=axis2_kind,
                       **{_QUANTITY_FIELDS[quantity]: values})
    return smap, quantity
