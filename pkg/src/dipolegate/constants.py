"""Physical constants (CODATA 2018, SI).

All values used anywhere in the package come from this file. ``hbar``,
``boltzmann``, ``planck`` and ``speed_of_light`` are exact in the 2019 SI;
``eps0`` and ``amu`` are the CODATA 2018 recommended values. The Debye is
rounded to six significant figures to keep output reproducible across
implementations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.054571817e-34  # J s
    four_pi_eps0: float = 4.0 * math.pi * 8.8541878128e-12  # C^2 N^-1 m^-2
    debye: float = 3.33564e-30  # C m per D
    boltzmann: float = 1.380649e-23  # J / K
    amu: float = 1.66053906660e-27  # kg
    planck: float = 6.62607015e-34  # J s
    speed_of_light: float = 299792458.0  # m / s

    def __post_init__(self) -> None:
        for name, value in vars(self).items():
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"constant {name} must be positive and finite")


CODATA2018 = PhysicalConstants()

HBAR = CODATA2018.hbar
FOUR_PI_EPS0 = CODATA2018.four_pi_eps0
DEBYE = CODATA2018.debye
KB = CODATA2018.boltzmann
AMU = CODATA2018.amu
PLANCK = CODATA2018.planck
C_LIGHT = CODATA2018.speed_of_light


def wavenumber_to_joule(wavenumber_cm: float) -> float:
    """Convert an energy in cm^-1 to joules."""
    return PLANCK * C_LIGHT * 100.0 * wavenumber_cm
