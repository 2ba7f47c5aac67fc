"""In-situ background calibration of measured transmission sweeps.

Raw sweeps are recorded in dB on four routes named by output/input pair:
O3I1, O4I1, O3I2, O4I2.  Off resonance the device is transparent, so
flux-sweeping the qubit lets the through routes (O4I1, O3I2) measure the
line attenuation alone.  The per-frequency median over the flux stack
rejects the narrow resonance that traverses it; the calibrated device
transmission follows by dB subtraction, cross-route:

    S31 = raw(O3I1) - bg(O4I1),   S42 = raw(O4I2) - bg(O3I2)

which is exact when the two short output wires are identical.  Routes
carry explicit wire-loss terms (default 0) so that assumption is stated
rather than silently applied.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from fluxdiode.errors import DataError

ROUTES = ("O3I1", "O4I1", "O3I2", "O4I2")
_BG_ROUTES = ("O4I1", "O3I2")
_INPUT1_ROUTES = ("O3I1", "O4I1")


def db_to_linear(x):
    """dB -> linear power: 10^(x/10), with x = 10 log10(|S|^2)."""
    x = np.asarray(x, dtype=float)
    out = 10.0 ** (x / 10.0)
    return float(out) if out.ndim == 0 else out


def linear_to_db(x):
    """Linear power -> dB; input must be strictly positive."""
    x = np.asarray(x, dtype=float)
    if (x <= 0.0).any():
        raise DataError("linear transmission must be positive to convert to dB")
    out = 10.0 * np.log10(x)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RawSweep:
    """One measured frequency sweep of a route, in dB, at one flux point."""

    freq: np.ndarray
    s_db: np.ndarray
    route: str
    flux: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "freq", np.asarray(self.freq, dtype=float))
        object.__setattr__(self, "s_db", np.asarray(self.s_db, dtype=float))
        if self.route not in ROUTES:
            raise DataError(f"unknown route {self.route!r}, expected one of {ROUTES}")
        if self.freq.ndim != 1 or self.freq.shape != self.s_db.shape:
            raise DataError("freq and s_db must be 1-D arrays of equal length")
        if self.freq.size > 1 and not (np.diff(self.freq) > 0).all():
            raise DataError("frequency grid must be strictly increasing")
        if not np.isfinite(self.s_db).all():
            raise DataError("dB values must be finite")


@dataclass(frozen=True)
class Background:
    """Per-frequency line backgrounds for the two input lines, in dB.

    bg41 is the input-1 background (route O4I1), bg32 the input-2
    background (route O3I2). wire_o33/wire_o44 hold the short output-wire
    losses; the standard analysis assumes both are 0.
    """

    freq: np.ndarray
    bg41: np.ndarray
    bg32: np.ndarray
    wire_o33: float = 0.0
    wire_o44: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "freq", np.asarray(self.freq, dtype=float))
        object.__setattr__(self, "bg41", np.asarray(self.bg41, dtype=float))
        object.__setattr__(self, "bg32", np.asarray(self.bg32, dtype=float))
        if not (self.freq.shape == self.bg41.shape == self.bg32.shape):
            raise DataError("background arrays must share the frequency grid")


@dataclass(frozen=True)
class CalibratedSweep:
    """Calibrated device transmission, in dB and linear units."""

    freq: np.ndarray
    s_db: np.ndarray
    s_linear: np.ndarray
    label: str


def extract_background(sweeps: Iterable[RawSweep], method: str = "median") -> Background:
    """Reduce flux-stacked through-route sweeps to per-frequency backgrounds.

    Needs routes O4I1 and O3I2, each with at least 3 flux points on a
    common frequency grid.  `method` is 'median' (robust to the resonance
    dip crossing the stack) or 'max' (most-transparent flux point).
    """
    if method not in ("median", "max"):
        raise DataError(f"method must be 'median' or 'max', got {method!r}")
    by_route: dict[str, list[RawSweep]] = {r: [] for r in _BG_ROUTES}
    for sweep in sweeps:
        if sweep.route in by_route:
            by_route[sweep.route].append(sweep)
    curves = {}
    grid = None
    for route in _BG_ROUTES:
        stack = by_route[route]
        if len(stack) < 3:
            raise DataError(
                f"background extraction needs >= 3 flux points on route {route}, "
                f"got {len(stack)}")
        grid = stack[0].freq
        for sweep in stack[1:]:
            if not np.array_equal(sweep.freq, grid):
                raise DataError(f"route {route}: flux stack grids do not match")
        data = np.vstack([sweep.s_db for sweep in stack])
        curves[route] = np.median(data, axis=0) if method == "median" else data.max(axis=0)
    return Background(freq=grid, bg41=curves["O4I1"], bg32=curves["O3I2"])


def calibrate(raw: RawSweep, bg: Background) -> CalibratedSweep:
    """Subtract the line background from a raw sweep (dB arithmetic).

    Input-1 routes use bg41, input-2 routes bg32.  For the cross routes
    (O3I1, O4I2) the output-wire losses enter with opposite signs and
    cancel only when equal; for the through routes they cancel exactly.
    """
    if not np.array_equal(raw.freq, bg.freq):
        raise DataError("raw sweep and background are on different frequency grids")
    background = bg.bg41 if raw.route in _INPUT1_ROUTES else bg.bg32
    s_db = raw.s_db - background
    wire_diff = bg.wire_o33 - bg.wire_o44
    if raw.route == "O3I1":
        s_db = s_db - wire_diff
    elif raw.route == "O4I2":
        s_db = s_db + wire_diff
    label = {"O3I1": "S31", "O4I1": "S41", "O3I2": "S32", "O4I2": "S42"}[raw.route]
    return CalibratedSweep(freq=raw.freq, s_db=s_db,
                           s_linear=db_to_linear(s_db), label=label)


def read_sweep_csv(path) -> list[RawSweep]:
    """Read sweeps from CSV: columns frequency_hz, s_db[, flux].

    Metadata lines start with '#'; `# route = O3I1` is required.  A flux
    column splits the file into one RawSweep per flux value.
    """
    route = None
    rows = []
    header = None
    with open(path, newline="", encoding="utf-8") as fh:
        for raw_line in fh:
            line = raw_line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    if key.strip().lower() == "route":
                        route = value.strip()
                continue
            cells = next(csv.reader([line]))
            if header is None:
                header = [c.strip().lower() for c in cells]
                continue
            rows.append([float(c) for c in cells])
    if route is None:
        raise DataError(f"{path}: missing '# route = ...' header")
    if header is None or header[:2] != ["frequency_hz", "s_db"]:
        raise DataError(f"{path}: expected columns frequency_hz, s_db[, flux]")
    data = np.asarray(rows, dtype=float)
    if data.size == 0:
        raise DataError(f"{path}: no data rows")
    has_flux = len(header) > 2 and header[2] == "flux"
    if not has_flux:
        return [RawSweep(freq=data[:, 0], s_db=data[:, 1], route=route)]
    sweeps = []
    for flux in np.unique(data[:, 2]):
        sel = data[data[:, 2] == flux]
        order = np.argsort(sel[:, 0])
        sweeps.append(RawSweep(freq=sel[order, 0], s_db=sel[order, 1],
                               route=route, flux=float(flux)))
    return sweeps


def write_background_csv(path, bg: Background):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        fh.write(f"# wire_o33 = {bg.wire_o33!r}\n# wire_o44 = {bg.wire_o44!r}\n")
        writer.writerow(["frequency_hz", "bg41_db", "bg32_db"])
        for f, a, b in zip(bg.freq, bg.bg41, bg.bg32):
            writer.writerow([repr(float(f)), repr(float(a)), repr(float(b))])


def read_background_csv(path) -> Background:
    wires = {"wire_o33": 0.0, "wire_o44": 0.0}
    rows = []
    header = None
    with open(path, newline="", encoding="utf-8") as fh:
        for raw_line in fh:
            line = raw_line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                key, _, value = body.partition("=")
                key = key.strip().lower()
                if key in wires:
                    wires[key] = float(value.strip())
                continue
            cells = next(csv.reader([line]))
            if header is None:
                header = [c.strip().lower() for c in cells]
                if header != ["frequency_hz", "bg41_db", "bg32_db"]:
                    raise DataError(f"{path}: expected frequency_hz, bg41_db, bg32_db")
                continue
            rows.append([float(c) for c in cells])
    data = np.asarray(rows, dtype=float)
    if data.size == 0:
        raise DataError(f"{path}: no data rows")
    return Background(freq=data[:, 0], bg41=data[:, 1], bg32=data[:, 2],
                      wire_o33=wires["wire_o33"], wire_o44=wires["wire_o44"])


def write_calibrated_csv(path, cal: CalibratedSweep):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        fh.write(f"# label = {cal.label}\n")
        writer.writerow(["frequency_hz", "s_db", "s_linear"])
        for f, d, lin in zip(cal.freq, cal.s_db, cal.s_linear):
            writer.writerow([repr(float(f)), repr(float(d)), repr(float(lin))])
