"""Closed-form hybridization layer for the two coupled resonators.

Diagonalizing the coupled-resonator Hamiltonian gives two hybrid normal
modes.  This module computes their frequencies, the mixing angle, the
damping-rate budget of the high-frequency mode, and the threshold powers
at which its transmission peak splits.

All rates are quoted as linear frequencies (rate/2pi, Hz); formulas that
need angular quantities convert internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from fluxdiode.constants import HBAR
from fluxdiode.errors import ParameterError
from fluxdiode.params import CircuitParams, PowerLevel


def coupled_mode_frequencies(fa: float, fb: float, g: float) -> tuple[float, float]:
    """Normal-mode frequencies (f_plus, f_minus) of two coupled oscillators.

    f_pm = sqrt((fa^2 + fb^2 +/- sqrt((fb^2 - fa^2)^2 + 16 g^2 fa fb)) / 2)

    The expression is homogeneous of degree one in (fa, fb, g), so linear
    frequencies can be used throughout.
    """
    s = fa * fa + fb * fb
    root = math.sqrt((fb * fb - fa * fa) ** 2 + 16.0 * g * g * fa * fb)
    f_plus = math.sqrt((s + root) / 2.0)
    f_minus = math.sqrt((s - root) / 2.0)
    return f_plus, f_minus


def hybrid_frequencies(p: CircuitParams) -> tuple[float, float]:
    """High and low hybrid-mode frequencies (f_high, f_low) in Hz."""
    return coupled_mode_frequencies(p.f1, p.f2, p.g12)


def mixing_angle(p: CircuitParams) -> float:
    """Mixing angle of the hybrid modes, principal branch.

    sin(2 theta) = 4 g12 sqrt(f1 f2) / sqrt((f2^2 - f1^2)^2 + 16 g12^2 f1 f2)

    For f2 > f1 the principal branch lies in [0, pi/4]; theta -> pi/4 in
    the symmetric limit f1 -> f2.  A mixing angle obtained by *fitting*
    data may exceed pi/4 and is stored separately by callers, never
    forced back through this formula.
    """
    root = math.sqrt((p.f2 ** 2 - p.f1 ** 2) ** 2 + 16.0 * p.g12 ** 2 * p.f1 * p.f2)
    if root == 0.0:
        return 0.0
    sin2t = 4.0 * p.g12 * math.sqrt(p.f1 * p.f2) / root
    return 0.5 * math.asin(min(1.0, sin2t))


def coupling_damping(f: float, z0: float, ck: float) -> float:
    """Capacitive damping rate of a resonator coupled to its feed line.

    kappa_c = 2 omega^3 Z0^2 Ck^2 / pi with omega = 2 pi f, returned as
    kappa_c/2pi in Hz.
    """
    if f <= 0.0 or z0 <= 0.0:
        raise ParameterError("frequency and impedance must be positive")
    if ck < 0.0:
        raise ParameterError("coupling capacitance must be non-negative")
    omega = 2.0 * math.pi * f
    kappa_angular = 2.0 * omega ** 3 * z0 ** 2 * ck ** 2 / math.pi
    return kappa_angular / (2.0 * math.pi)


def hybrid_damping(p: CircuitParams, theta: float, f_high: float) -> tuple[float, float]:
    """Partial damping rates of the high mode through the two feed lines.

    kappa_h1 = (f1/f_high) sin^2(theta) kappa_c1
    kappa_h2 = (f2/f_high) cos^2(theta) kappa_c2
    """
    kappa_c1 = coupling_damping(p.f1, p.z0, p.ck1)
    kappa_c2 = coupling_damping(p.f2, p.z0, p.ck2)
    kh1 = (p.f1 / f_high) * math.sin(theta) ** 2 * kappa_c1
    kh2 = (p.f2 / f_high) * math.cos(theta) ** 2 * kappa_c2
    return kh1, kh2


def threshold_ratio(p: CircuitParams, kappa_h1: float, kappa_h2: float) -> float:
    """Ratio pstar1/pstar2 of the peak-splitting threshold powers.

    ratio = f1^4 kappa_h2 / (f2^4 kappa_h1); reduces to cot^2(theta) when
    the two coupling capacitors are equal.
    """
    if kappa_h1 <= 0.0:
        raise ParameterError("kappa_h1 must be positive for a finite threshold ratio")
    return (p.f1 / p.f2) ** 4 * kappa_h2 / kappa_h1


def threshold_power(kappa_h: float, f_j: float, kappa_hj: float, f_high: float) -> PowerLevel:
    """Input power (watts) at which the single transmission peak splits.

    P_j* = (2/9) hbar kappa_h^2 omega_j^4 / (kappa_hj omega_h^3), with all
    angular quantities; the arguments are the usual /2pi values in Hz.
    """
    if min(kappa_h, f_j, kappa_hj, f_high) <= 0.0:
        raise ParameterError("threshold_power requires positive rates and frequencies")
    two_pi = 2.0 * math.pi
    watts = (2.0 / 9.0) * HBAR * (two_pi * kappa_h) ** 2 * (two_pi * f_j) ** 4 \
        / ((two_pi * kappa_hj) * (two_pi * f_high) ** 3)
    return PowerLevel.from_watts(watts)


@dataclass(frozen=True)
class HybridMode:
    """Derived record of the high hybrid mode of the coupled resonators.

    All rates are /2pi in Hz.  kappa_h (total damping) is a property so
    that kappa_h == kappa_h1 + kappa_h2 + kappa_hi holds exactly by
    construction.
    """

    f_high: float
    f_low: float
    mixing_angle: float
    kappa_c1: float
    kappa_c2: float
    kappa_h1: float
    kappa_h2: float
    kappa_hi: float
    pstar1: PowerLevel
    pstar2: PowerLevel

    def __post_init__(self):
        if not (self.f_high >= self.f_low > 0.0):
            raise ParameterError("hybrid frequencies must satisfy f_high >= f_low > 0")
        if not 0.0 <= self.mixing_angle <= math.pi / 2.0:
            raise ParameterError("mixing angle out of [0, pi/2]")

    @property
    def kappa_h(self) -> float:
        return self.kappa_h1 + self.kappa_h2 + self.kappa_hi


def derive_mode(p: CircuitParams) -> HybridMode:
    """Evaluate the whole theory chain from circuit parameters."""
    f_high, f_low = hybrid_frequencies(p)
    theta = mixing_angle(p)
    kappa_c1 = coupling_damping(p.f1, p.z0, p.ck1)
    kappa_c2 = coupling_damping(p.f2, p.z0, p.ck2)
    kappa_h1, kappa_h2 = hybrid_damping(p, theta, f_high)
    kappa_h = kappa_h1 + kappa_h2 + p.kappa_hi
    pstar1 = threshold_power(kappa_h, p.f1, kappa_h1, f_high)
    pstar2 = threshold_power(kappa_h, p.f2, kappa_h2, f_high)
    return HybridMode(
        f_high=f_high,
        f_low=f_low,
        mixing_angle=theta,
        kappa_c1=kappa_c1,
        kappa_c2=kappa_c2,
        kappa_h1=kappa_h1,
        kappa_h2=kappa_h2,
        kappa_hi=p.kappa_hi,
        pstar1=pstar1,
        pstar2=pstar2,
    )
