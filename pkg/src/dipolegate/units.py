"""Closed-form interaction, timing and budget calculators.

Everything is SI with hbar explicit: a dipole-dipole energy d_A d_B / r^3 in
Gaussian form becomes d_A d_B / (4 pi eps0 r^3) here. Rates are angular
frequencies (rad/s), i.e. energies divided by hbar.
"""

from __future__ import annotations

import math

from .constants import DEBYE, FOUR_PI_EPS0, HBAR
from .errors import ZeroRate
from .molecules import Architecture, Geometry

MAGIC_ANGLE = math.acos(1.0 / math.sqrt(3.0))


def debye_to_si(d: float) -> float:
    return d * DEBYE


# |3cos^2 - 1| below this counts as exactly zero: absorbs rounding in
# acos(1/sqrt 3) and six-digit angles (about 3.5 urad around the magic angle)
ANGULAR_ZERO = 1e-5


def angular_factor(theta: float) -> float:
    factor = 3.0 * math.cos(theta) ** 2 - 1.0
    return 0.0 if abs(factor) < ANGULAR_ZERO else factor


def unit_dipole_rate(geometry: Geometry) -> float:
    """Interaction rate (rad/s) for two 1 D dipoles in ``geometry``.

    Lattice: (3 cos^2 theta - 1) / (4 pi eps0 hbar r^3).
    Wire: 1 / (4 pi eps0 hbar h^2 r); the trap aligns the dipoles, so there
    is no angular factor.
    """
    prefactor = DEBYE**2 / (FOUR_PI_EPS0 * HBAR)
    if geometry.architecture is Architecture.WIRE:
        return prefactor / (geometry.h**2 * geometry.r)
    return prefactor * angular_factor(geometry.theta) / geometry.r**3


def dipole_dipole_rate(d_a: float, d_b: float, geometry: Geometry) -> float:
    """Signed dipole-dipole interaction V/hbar in rad/s for dipoles in Debye."""
    return d_a * d_b * unit_dipole_rate(geometry)


def pi_phase_time(rate: float, rho_e: float = 1.0) -> float:
    """Hold time after which the pair acquires a phase of pi.

    With a constant excited fraction ``rho_e`` on both molecules the phase
    grows as |rate| * rho_e**2 * t.
    """
    if not 0.0 < rho_e <= 1.0:
        raise ValueError("rho_e must lie in (0, 1]")
    if rate == 0.0 or not math.isfinite(rate):
        raise ZeroRate("dipole-dipole rate is zero; no phase can accumulate")
    return math.pi / (abs(rate) * rho_e**2)


def operations_budget(coherence_time: float, gate_time: float) -> int:
    if not (coherence_time > 0 and gate_time > 0):
        raise ValueError("coherence_time and gate_time must be positive")
    return math.floor(coherence_time / gate_time)


def stark_mixed_dipole(mu: float, B: float, E: float) -> float:
    """Lab-frame dipole (Debye) of the field-dressed N=0 state.

    Two-level rigid-rotor model: N=0 at energy 0 and N=1 at 2B, coupled by
    -mu E / sqrt(3). The dressed ground energy is B - sqrt(B^2 + mu^2 E^2 / 3)
    and the induced dipole is minus its field derivative.

    Parameters
    ----------
    mu : float
        Body-frame permanent dipole in Debye.
    B : float
        Rotational constant in joules.
    E : float
        DC field in V/m.
    """
    if mu <= 0 or B <= 0:
        raise ValueError("mu and B must be positive")
    if E < 0:
        raise ValueError("field must be non-negative")
    mu_si = debye_to_si(mu)
    x = mu_si * E
    d_si = (mu_si * x / 3.0) / math.sqrt(B * B + x * x / 3.0)
    return d_si / DEBYE
