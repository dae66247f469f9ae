"""Pulse schedules for the four phase-gate schemes.

Level convention for every scheme: ``"0"`` and ``"1"`` are the qubit levels,
``"e"`` the switching level. All pulses are resonant and rectangular.

* direct: excite 1->e on both molecules, hold while |ee> picks up pi,
  de-excite. Net gate diag(1, 1, 1, -1).
* rotational: the direct sequence with |e> an equal superposition of two
  rotational states, whose dipole is the transition dipole between them.
* inverted: qubit levels carry a DC-induced dipole, |e> carries none; the
  ground pair picks up pi during the hold and a closing DC step adds a
  uniform pi. Net gate diag(1, -1, -1, -1).
* blockade: pi on A, 2pi on B, pi on A; B's 2pi fails when A sits in |e>.
  Net gate diag(1, -1, -1, -1) in the strong-interaction limit.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, replace

from .dynamics import DCFieldSpec, PhaseStep, PulseSpec, Schedule, System, effective_dipoles
from .errors import BlockadeRegimeWarning, ConfigError, RestrictionViolation, ZeroRate
from .molecules import Architecture, MoleculeSpec
from .units import dipole_dipole_rate, pi_phase_time

# instantaneous pulses last this fraction of the interaction time; much
# shorter and the start time of the closing pulse (~tau) rounds away part of
# its area
INSTANT_FRACTION = 1e-9
BLOCKADE_MIN_RATIO = 10.0
QUBIT_LEVELS = ("0", "1")
EXCITED = "e"


class Scheme(str, enum.Enum):
    DIRECT = "direct"
    INVERTED = "inverted"
    ROTATIONAL = "rotational"
    BLOCKADE = "blockade"


@dataclass(frozen=True)
class SchemeParams:
    scheme: Scheme
    system: System
    pulse_rabi: float = 0.0  # rad/s
    instantaneous_pulses: bool = False
    rho_e_target: float = 1.0
    dc_field: float = 0.0  # V/m, inverted scheme only
    area_factor: float = 1.0  # scales every pulse area; 1 is a perfect pulse

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "scheme", Scheme(self.scheme))
        except ValueError:
            raise ConfigError(f"unknown scheme {self.scheme!r}") from None
        if not 0.0 < self.rho_e_target <= 1.0:
            raise ConfigError("rho_e_target must lie in (0, 1]")
        if not self.instantaneous_pulses and not self.pulse_rabi > 0:
            raise ConfigError("pulse_rabi must be > 0 for finite pulses")
        if self.dc_field < 0:
            raise ConfigError("dc_field must be >= 0")
        if not self.area_factor > 0:
            raise ConfigError("area_factor must be > 0")

    def with_system(self, system: System) -> "SchemeParams":
        return replace(self, system=system)


def _require_levels(mol: MoleculeSpec) -> None:
    for label in (*QUBIT_LEVELS, EXCITED):
        mol.level(label)


def _excitation_area(rho_e: float) -> float:
    return 2.0 * math.asin(math.sqrt(rho_e))


def _ramp_integral(area: float, rabi: float) -> float:
    """Integral of sin^4(rabi t / 2) over a pulse of the given area."""
    return (3.0 * area / 8.0 - math.sin(area) / 2.0 + math.sin(2.0 * area) / 16.0) / rabi


def _excite_deexcite(
    p: SchemeParams, area: float, hold_fn
) -> tuple[list[PulseSpec], float, float, float]:
    """Simultaneous excitation of both molecules, hold, reversed de-excitation.

    ``hold_fn(duration, rabi)`` returns the hold length. The de-excitation
    pulse has phase pi so that each molecule's pulse pair is the identity
    when no interaction acts.
    """
    if p.instantaneous_pulses:
        duration = INSTANT_FRACTION * hold_fn(0.0, math.inf)
        rabi = area / duration
        hold = hold_fn(duration, rabi)
    else:
        rabi = p.pulse_rabi
        duration = area / rabi
        hold = hold_fn(duration, rabi)
    drive = rabi * p.area_factor
    pulses = []
    for mol in ("A", "B"):
        pulses.append(PulseSpec(mol, ("1", EXCITED), drive, 0.0, duration))
        pulses.append(PulseSpec(mol, ("1", EXCITED), drive, duration + hold, duration, phase=math.pi))
    return pulses, duration, hold, drive


def _build_switched(p: SchemeParams, d_a: float, d_b: float) -> Schedule:
    rate = dipole_dipole_rate(d_a, d_b, p.system.geometry)
    tau = pi_phase_time(rate, p.rho_e_target)
    area = _excitation_area(p.rho_e_target)

    def hold_fn(duration: float, rabi: float) -> float:
        if duration == 0.0:
            return tau
        # both ramps already contribute |rate| * ramp to the phase
        hold = tau - 2.0 * _ramp_integral(area, rabi) / p.rho_e_target**2
        if hold <= 0:
            raise ConfigError(
                f"pulses of {duration:.3g} s are too slow for an interaction time of {tau:.3g} s"
            )
        return hold

    pulses, duration, hold, drive = _excite_deexcite(p, area, hold_fn)
    return Schedule(
        pulses=pulses,
        total_time=2.0 * duration + hold,
        metadata={
            "scheme": p.scheme.value,
            "rate_rad_s": rate,
            "tau_pi_s": tau,
            "hold_s": hold,
            "pulse_duration_s": duration,
            "pulse_rabi_rad_s": drive,
            "rho_e_target": p.rho_e_target,
            "interaction": {"levels": [EXCITED, EXCITED], "dipoles_debye": [d_a, d_b], "time_s": tau},
            "warnings": [],
        },
    )


def build_direct(p: SchemeParams) -> Schedule:
    """Direct scheme: zero-dipole qubit levels, dipole-carrying |e>."""
    system = p.system
    dipoles = []
    for mol in (system.molecule_a, system.molecule_b):
        _require_levels(mol)
        for label in QUBIT_LEVELS:
            if mol.zero_field_dipole(label) != 0.0:
                raise ConfigError(f"{mol.name}: level {label!r} must carry no dipole for the direct scheme")
        dipoles.append(mol.zero_field_dipole(EXCITED))
    return _build_switched(p, *dipoles)


def check_rotational_restrictions(mol: MoleculeSpec) -> tuple[str, str]:
    """Validate a rotational-scheme level structure; return the |e> components."""
    _require_levels(mol)
    for label in QUBIT_LEVELS:
        if mol.level(label).rotational_N != 0:
            raise ConfigError(f"{mol.name}: level {label!r} must be an N=0 level")
    photons = mol.coupling_photons("1", EXCITED)
    if photons is None or photons < 2:
        raise RestrictionViolation(1, f"{mol.name}: |1>-|e> must be declared as a two- or more-photon coupling")
    if mol.coupling_photons("0", EXCITED) is not None:
        raise RestrictionViolation(1, f"{mol.name}: the |1>-|e> photon combination must not couple |0>")
    components = mol.level(EXCITED).superposition_of
    if components is None or mol.transition_dipole(*components) == 0.0:
        raise RestrictionViolation(2, f"{mol.name}: |e> needs a dipole-allowed transition between its components")
    for upper in (*components, EXCITED):
        for lower in QUBIT_LEVELS:
            if mol.transition_dipole(upper, lower) != 0.0:
                raise RestrictionViolation(
                    3, f"{mol.name}: dipole-allowed transition {upper}<->{lower} lets the excitation hop"
                )
    return components


def build_rotational(p: SchemeParams) -> Schedule:
    dipoles = []
    for mol in (p.system.molecule_a, p.system.molecule_b):
        components = check_rotational_restrictions(mol)
        dipoles.append(mol.transition_dipole(*components))
    return _build_switched(p, *dipoles)


def build_inverted(p: SchemeParams) -> Schedule:
    """Inverted scheme: DC-dressed qubit levels interact, |e> does not."""
    system = p.system
    induced = []
    for mol in (system.molecule_a, system.molecule_b):
        _require_levels(mol)
        if mol.rotational_constant_B is None:
            raise ConfigError(f"{mol.name}: the inverted scheme needs a rotational constant")
        d = effective_dipoles(mol, p.dc_field)
        d0, d1 = d[mol.index("0")], d[mol.index("1")]
        if d0 != d1:
            raise ConfigError(f"{mol.name}: qubit levels must acquire equal induced dipoles")
        induced.append(float(d0))
    if p.dc_field == 0.0 or 0.0 in induced:
        raise ZeroRate("no induced dipole: the DC field is zero or the qubit levels are not polar")
    rate = dipole_dipole_rate(induced[0], induced[1], system.geometry)
    hold_time = pi_phase_time(rate, 1.0)
    area = _excitation_area(p.rho_e_target)

    pulses, duration, hold, drive = _excite_deexcite(p, area, lambda duration, rabi: hold_time)
    total = 2.0 * duration + hold
    residual = [
        float(effective_dipoles(mol, p.dc_field)[mol.index(EXCITED)])
        for mol in (system.molecule_a, system.molecule_b)
    ]
    warn = []
    if any(residual):
        warn.append(f"|e> keeps a dipole {residual} D; |0e> and |ee> will pick up phase")
    return Schedule(
        pulses=pulses,
        total_time=total,
        dc_intervals=[DCFieldSpec(p.dc_field, duration, hold)],
        # closing DC step: uniform pi on the register, reproducing the
        # final column of the inverted truth table
        phase_steps=[PhaseStep("A", {"0": math.pi, "1": math.pi}, total)],
        metadata={
            "scheme": p.scheme.value,
            "rate_rad_s": rate,
            "tau_pi_s": hold_time,
            "hold_s": hold,
            "pulse_duration_s": duration,
            "pulse_rabi_rad_s": drive,
            "dc_field_v_m": p.dc_field,
            "induced_dipoles_debye": induced,
            "interaction": {"levels": ["0", "0"], "dipoles_debye": induced, "time_s": hold_time},
            "warnings": warn,
        },
    )


def build_blockade(p: SchemeParams) -> Schedule:
    """pi pulse on A, 2pi pulse on B, pi pulse on A, back to back.

    A's pulses carry phase pi so |10> passes through i|e0>; the pulse pair
    returns -|10>.
    """
    if p.instantaneous_pulses:
        raise ConfigError("the blockade scheme needs finite pulses")
    system = p.system
    for mol in (system.molecule_a, system.molecule_b):
        _require_levels(mol)
    d_a = system.molecule_a.zero_field_dipole(EXCITED)
    d_b = system.molecule_b.zero_field_dipole(EXCITED)
    rate = dipole_dipole_rate(d_a, d_b, system.geometry)
    rabi = p.pulse_rabi
    drive = rabi * p.area_factor
    t_pi = math.pi / rabi
    t_2pi = 2.0 * math.pi / rabi
    t1, t2, t3 = 0.0, t_pi, t_pi + t_2pi
    pulses = [
        PulseSpec("A", ("1", EXCITED), drive, t1, t_pi, phase=math.pi),
        PulseSpec("B", ("1", EXCITED), drive, t2, t_2pi),
        PulseSpec("A", ("1", EXCITED), drive, t3, t_pi, phase=math.pi),
    ]
    ratio = abs(rate) / rabi
    warn = []
    if ratio < BLOCKADE_MIN_RATIO:
        msg = f"BlockadeRegimeWarning: V/Omega = {ratio:.3g} < {BLOCKADE_MIN_RATIO:g}; blockade is incomplete"
        warn.append(msg)
        warnings.warn(msg, BlockadeRegimeWarning, stacklevel=2)
    return Schedule(
        pulses=pulses,
        total_time=t3 + t_pi,
        metadata={
            "scheme": p.scheme.value,
            "rate_rad_s": rate,
            "pulse_rabi_rad_s": drive,
            "blockade_ratio": ratio,
            "pulse_times_s": [t1, t2, t3],
            "interaction": {"levels": [EXCITED, EXCITED], "dipoles_debye": [d_a, d_b], "time_s": t_2pi},
            "warnings": warn,
        },
    )


_BUILDERS = {
    Scheme.DIRECT: build_direct,
    Scheme.INVERTED: build_inverted,
    Scheme.ROTATIONAL: build_rotational,
    Scheme.BLOCKADE: build_blockade,
}


def build_schedule(p: SchemeParams) -> Schedule:
    return _BUILDERS[p.scheme](p)


def interaction_dipoles(p: SchemeParams) -> tuple[float, float]:
    """Dipoles of the level pair whose interaction the scheme relies on."""
    mol_a, mol_b = p.system.molecule_a, p.system.molecule_b
    if p.scheme is Scheme.INVERTED:
        return (
            float(effective_dipoles(mol_a, p.dc_field)[mol_a.index("0")]),
            float(effective_dipoles(mol_b, p.dc_field)[mol_b.index("0")]),
        )
    if p.scheme is Scheme.ROTATIONAL:
        return (
            mol_a.transition_dipole(*check_rotational_restrictions(mol_a)),
            mol_b.transition_dipole(*check_rotational_restrictions(mol_b)),
        )
    return mol_a.zero_field_dipole(EXCITED), mol_b.zero_field_dipole(EXCITED)


def interaction_rate(p: SchemeParams) -> float:
    return dipole_dipole_rate(*interaction_dipoles(p), p.system.geometry)


def with_blockade_ratio(p: SchemeParams, ratio: float) -> SchemeParams:
    """Move the molecules so that |V| / pulse_rabi equals ``ratio``."""
    if not ratio > 0:
        raise ConfigError("blockade ratio must be > 0")
    rate = interaction_rate(p)
    if rate == 0.0:
        raise ZeroRate("cannot reach a blockade ratio with zero interaction")
    geom = p.system.geometry
    scale = abs(rate) / (ratio * p.pulse_rabi)
    power = 1.0 if geom.architecture is Architecture.WIRE else 3.0
    return p.with_system(p.system.with_geometry(geom.with_r(geom.r * scale ** (1.0 / power))))
