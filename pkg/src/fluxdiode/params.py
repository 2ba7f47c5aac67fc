"""Device parameters, unit handling, and parameter-file loading.

Conventions used throughout the package:

* All frequencies, damping rates and the Kerr coefficient are *linear*
  frequencies in Hz (the usual "value/2pi" quoting convention).  Angular
  frequencies only ever appear inside formulas that need them.
* Microwave powers carry an explicit unit tag (:class:`PowerLevel`);
  silent dBm/W coercion is forbidden because it is the dominant error
  mode in this kind of analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from fluxdiode.errors import ParameterError

PARAM_KEYS = (
    "f1", "f2", "g12", "z0", "ck1", "ck2",
    "kappa_hi", "chi", "kerr",
    "ej", "alpha", "ec1", "ec2",
)

_CIRCUIT_REQUIRED = ("f1", "f2", "g12", "z0", "ck1", "ck2")
_QUBIT_REQUIRED = ("ej", "alpha", "ec1", "ec2")


@dataclass(frozen=True)
class PowerLevel:
    """A microwave power tagged as either 'dbm' or 'w' (watts)."""

    value: float
    unit: str

    def __post_init__(self):
        if self.unit not in ("dbm", "w"):
            raise ParameterError(f"unknown power unit {self.unit!r}, expected 'dbm' or 'w'")
        if not math.isfinite(self.value):
            raise ParameterError("power value must be finite")
        if self.unit == "w" and self.value <= 0.0:
            raise ParameterError("power in watts must be strictly positive")

    @classmethod
    def from_dbm(cls, value: float) -> "PowerLevel":
        return cls(float(value), "dbm")

    @classmethod
    def from_watts(cls, value: float) -> "PowerLevel":
        return cls(float(value), "w")

    @property
    def watts(self) -> float:
        if self.unit == "w":
            return self.value
        return 1e-3 * 10.0 ** (self.value / 10.0)

    @property
    def dbm(self) -> float:
        if self.unit == "dbm":
            return self.value
        return 10.0 * math.log10(self.value / 1e-3)


def dbm_to_watts(p: PowerLevel) -> PowerLevel:
    """Convert a dBm-tagged power to watts: W = 1e-3 * 10^(dBm/10)."""
    if p.unit != "dbm":
        raise ParameterError("dbm_to_watts expects a dBm-tagged power")
    return PowerLevel.from_watts(p.watts)

def watts_to_dbm(p: PowerLevel) -> PowerLevel:
    """Inverse of :func:`dbm_to_watts`."""
    if p.unit != "w":
        raise ParameterError("watts_to_dbm expects a watts-tagged power")
    return PowerLevel.from_dbm(p.dbm)


@dataclass(frozen=True)
class CircuitParams:
    """Linear circuit parameters of the two-resonator device.

    Parameters
    ----------
    f1, f2:
        Bare fundamental frequencies of the two resonators in Hz,
        with f2 > f1 by convention.
    g12:
        Resonator-resonator coupling strength in Hz.
    z0:
        Line/resonator impedance in Ohm.
    ck1, ck2:
        Capacitances coupling each resonator to its feed line, in F.
    kappa_hi:
        Internal damping rate of the hybrid mode in Hz (0 if unknown).
    chi:
        Dispersive shift of the hybrid mode in Hz.
    kerr:
        Kerr coefficient of the combined mode in Hz; may be negative.
    """

    f1: float
    f2: float
    g12: float
    z0: float
    ck1: float
    ck2: float
    kappa_hi: float = 0.0
    chi: float = 0.0
    kerr: float = 0.0

    def __post_init__(self):
        if self.f1 <= 0.0 or self.f2 <= 0.0:
            raise ParameterError("f1 and f2 must be positive")
        if self.f2 <= self.f1:
            raise ParameterError(f"f2 must exceed f1 (got f1={self.f1}, f2={self.f2})")
        if self.z0 <= 0.0:
            raise ParameterError("z0 must be positive")
        if self.ck1 < 0.0 or self.ck2 < 0.0:
            raise ParameterError("coupling capacitances must be non-negative")
        if self.kappa_hi < 0.0:
            raise ParameterError("kappa_hi must be non-negative")


@dataclass(frozen=True)
class FluxQubitParams:
    """Three-junction flux qubit parameters.

    ej is the Josephson energy of the two nominally equal big junctions
    expressed as a frequency (E_J/h, Hz); alpha scales the smaller third
    junction.  ec1 and ec2 are the single-electron charging energies of
    the two islands (e^2/2C_G, as Hz).  flux is the external flux in
    units of the flux quantum, periodic with period 1.
    """

    ej: float
    alpha: float
    ec1: float
    ec2: float
    flux: float

    def __post_init__(self):
        if self.ej <= 0.0:
            raise ParameterError("ej must be positive")
        if not 0.0 <= self.alpha < 1.0:
            raise ParameterError(f"alpha must lie in [0, 1), got {self.alpha}")
        if self.ec1 <= 0.0 or self.ec2 <= 0.0:
            raise ParameterError("charging energies must be positive")
        if not math.isfinite(self.flux):
            raise ParameterError("flux must be finite")


def _read_key_values(path) -> dict:
    """Parse a `key = value` text file with `#` comments."""
    values = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{lineno}: expected 'key = value', got {rawline!r}")
        key, _, raw = line.partition("=")
        key = key.strip().lower()
        if key not in PARAM_KEYS:
            raise ParameterError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ParameterError(f"{path}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = float(raw.strip())
        except ValueError:
            raise ParameterError(
                f"{path}:{lineno}: non-numeric value for {key!r}: {raw.strip()!r}"
            ) from None
    return values


def load_params(path) -> CircuitParams:
    """Load and validate circuit parameters from a key-value text file.

    Missing required keys, non-numeric values and invariant violations
    are all reported as :class:`ParameterError` naming the offending key.
    """
    values = _read_key_values(path)
    missing = [k for k in _CIRCUIT_REQUIRED if k not in values]
    if missing:
        raise ParameterError(f"{path}: missing required key(s): {', '.join(missing)}")
    return CircuitParams(
        f1=values["f1"],
        f2=values["f2"],
        g12=values["g12"],
        z0=values["z0"],
        ck1=values["ck1"],
        ck2=values["ck2"],
        kappa_hi=values.get("kappa_hi", 0.0),
        chi=values.get("chi", 0.0),
        kerr=values.get("kerr", 0.0),
    )


def load_qubit_params(path, flux: float) -> FluxQubitParams:
    """Load flux-qubit parameters from the same file format as load_params.

    The external flux is a sweep variable, so it is passed in rather than
    read from the file.
    """
    values = _read_key_values(path)
    missing = [k for k in _QUBIT_REQUIRED if k not in values]
    if missing:
        raise ParameterError(f"{path}: missing required key(s): {', '.join(missing)}")
    return FluxQubitParams(
        ej=values["ej"],
        alpha=values["alpha"],
        ec1=values["ec1"],
        ec2=values["ec2"],
        flux=flux,
    )
