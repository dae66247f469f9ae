"""Pulse-level simulation of dipolar phase gates between two polar molecules."""

from .analysis import (
    GateResult,
    MonteCarloResult,
    ScanResult,
    blockade_scan,
    cz_equivalent,
    extract_gate,
    thermal_phase_spread,
    thermal_sigma_from_temperature,
)
from .dynamics import (
    DCFieldSpec,
    PhaseStep,
    PropagationOptions,
    PulseSpec,
    Schedule,
    System,
    eq1_phase,
    propagate,
    segment_hamiltonian,
)
from .molecules import Architecture, Geometry, LevelSpec, MoleculeSpec, get_preset, preset_names
from .protocols import (
    Scheme,
    SchemeParams,
    build_blockade,
    build_direct,
    build_inverted,
    build_rotational,
    build_schedule,
)
from .state import LevelBasis, RegisterState, overlap, product_state, superpose
from .units import debye_to_si, dipole_dipole_rate, operations_budget, pi_phase_time, stark_mixed_dipole

__version__ = "0.1.0"
