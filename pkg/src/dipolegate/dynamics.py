"""Piecewise-constant rotating-frame dynamics for two molecules.

A :class:`Schedule` is a set of rectangular pulses, DC-field intervals and
instantaneous single-molecule phase steps. Between consecutive boundary
times the Hamiltonian is constant and the state is advanced by its exact
exponential: spectral decomposition for the Hermitian case, scipy's
scaling-and-squaring Pade approximant (order 13) when decay makes the
generator non-Hermitian.

Per molecule, a pulse on ``from -> to`` contributes, in rad/s,

    -detuning |to><to| + rabi/2 (exp(i phase) |to><from| + h.c.)

and the pair interaction is diagonal: every product level |ab> is shifted
by the dipole-dipole rate of the two levels' effective dipoles. Resonant
exchange between |e1> and |1e> is not modelled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Literal, Mapping, Sequence

import numpy as np
import scipy.linalg

from .errors import ConfigError, EmptyTrajectory, InvalidTime, NonFiniteAmplitude, UnknownLabel
from .molecules import Geometry, MoleculeSpec
from .state import HermitianOperator, LevelBasis, RegisterState
from .units import stark_mixed_dipole, unit_dipole_rate

Molecule = Literal["A", "B"]

# boundaries closer than this fraction of the total time are merged
_TIME_EPS = 1e-14


@dataclass(frozen=True)
class PulseSpec:
    molecule: Molecule
    transition: tuple[str, str]
    rabi: float  # rad/s
    t_start: float
    duration: float
    detuning: float = 0.0  # rad/s
    phase: float = 0.0

    def __post_init__(self) -> None:
        if self.molecule not in ("A", "B"):
            raise ConfigError(f"pulse molecule must be 'A' or 'B', got {self.molecule!r}")
        src, dst = self.transition
        object.__setattr__(self, "transition", (src, dst))
        if src == dst:
            raise ConfigError("pulse transition needs two distinct levels")
        if not self.duration > 0:
            raise ConfigError("pulse duration must be > 0")
        if self.t_start < 0:
            raise ConfigError("pulse cannot start before t=0")

    @property
    def t_end(self) -> float:
        return self.t_start + self.duration

    @property
    def area(self) -> float:
        return self.rabi * self.duration


@dataclass(frozen=True)
class DCFieldSpec:
    field: float  # V/m
    t_start: float
    duration: float

    def __post_init__(self) -> None:
        if self.field < 0:
            raise ConfigError("DC field must be >= 0")
        if not self.duration > 0:
            raise ConfigError("DC interval duration must be > 0")
        if self.t_start < 0:
            raise ConfigError("DC interval cannot start before t=0")

    @property
    def t_end(self) -> float:
        return self.t_start + self.duration


@dataclass(frozen=True)
class PhaseStep:
    """Instantaneous diagonal phase exp(i phase) on levels of one molecule."""

    molecule: Molecule
    phases: Mapping[str, float]
    time: float

    def __post_init__(self) -> None:
        if self.molecule not in ("A", "B"):
            raise ConfigError(f"phase step molecule must be 'A' or 'B', got {self.molecule!r}")
        object.__setattr__(self, "phases", dict(self.phases))


@dataclass(frozen=True, eq=False)
class Schedule:
    pulses: tuple[PulseSpec, ...]
    total_time: float
    dc_intervals: tuple[DCFieldSpec, ...] = ()
    phase_steps: tuple[PhaseStep, ...] = ()
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "pulses", tuple(self.pulses))
        object.__setattr__(self, "dc_intervals", tuple(self.dc_intervals))
        object.__setattr__(self, "phase_steps", tuple(self.phase_steps))
        if self.total_time < 0 or not math.isfinite(self.total_time):
            raise ConfigError("total_time must be finite and >= 0")
        slack = _TIME_EPS * max(self.total_time, 1e-300)
        for item in (*self.pulses, *self.dc_intervals):
            if item.t_end > self.total_time + slack:
                raise ConfigError(f"{type(item).__name__} ends at {item.t_end} after total_time {self.total_time}")
        for step in self.phase_steps:
            if not 0.0 <= step.time <= self.total_time + slack:
                raise ConfigError("phase step outside the schedule")

    @classmethod
    def empty(cls, total_time: float = 0.0) -> "Schedule":
        return cls(pulses=(), total_time=total_time)

    @cached_property
    def boundaries(self) -> tuple[float, ...]:
        times = {0.0, self.total_time}
        for item in (*self.pulses, *self.dc_intervals):
            times.update((item.t_start, min(item.t_end, self.total_time)))
        times.update(step.time for step in self.phase_steps)
        return _merge_times(sorted(times), self.total_time)

    def window(self, t0: float, t1: float) -> "Schedule":
        """The part of the schedule in [t0, t1], shifted to start at zero.

        Phase steps at exactly ``t1`` stay with the later window unless
        ``t1`` is the end of the schedule.
        """
        if not 0.0 <= t0 < t1 <= self.total_time:
            raise InvalidTime(f"window [{t0}, {t1}] not inside [0, {self.total_time}]")
        pulses = []
        for p in self.pulses:
            start, end = max(p.t_start, t0), min(p.t_end, t1)
            if end > start:
                pulses.append(replace(p, t_start=start - t0, duration=end - start))
        fields = []
        for dc in self.dc_intervals:
            start, end = max(dc.t_start, t0), min(dc.t_end, t1)
            if end > start:
                fields.append(replace(dc, t_start=start - t0, duration=end - start))
        last = t1 == self.total_time
        steps = [
            replace(s, time=s.time - t0)
            for s in self.phase_steps
            if t0 <= s.time < t1 or (last and s.time == t1)
        ]
        return Schedule(pulses, t1 - t0, fields, steps, dict(self.metadata))

    def active_pulses(self, t: float) -> list[PulseSpec]:
        return [p for p in self.pulses if p.t_start <= t < p.t_end]

    def dc_field(self, t: float) -> float:
        return sum(dc.field for dc in self.dc_intervals if dc.t_start <= t < dc.t_end)


def _merge_times(times: Sequence[float], total: float) -> tuple[float, ...]:
    eps = _TIME_EPS * max(total, 1e-300)
    out: list[float] = []
    for t in times:
        if not out or t - out[-1] > eps:
            out.append(t)
    return tuple(out)


@dataclass(frozen=True)
class PropagationOptions:
    include_decay: bool = False
    trajectory_samples: int = 0
    tolerance: float = 1e-9

    def __post_init__(self) -> None:
        if self.trajectory_samples < 0:
            raise ConfigError("trajectory_samples must be >= 0")
        if not 0.0 < self.tolerance <= 1e-6:
            raise ConfigError("tolerance must lie in (0, 1e-6]")


@dataclass(frozen=True)
class System:
    molecule_a: MoleculeSpec
    molecule_b: MoleculeSpec
    geometry: Geometry

    @cached_property
    def basis(self) -> LevelBasis:
        return LevelBasis.for_molecules(self.molecule_a, self.molecule_b)

    def molecule(self, which: Molecule) -> MoleculeSpec:
        return self.molecule_a if which == "A" else self.molecule_b

    def with_geometry(self, geometry: Geometry) -> "System":
        return System(self.molecule_a, self.molecule_b, geometry)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    amplitudes: np.ndarray  # (n_samples, dim)
    basis: LevelBasis

    def __len__(self) -> int:
        return len(self.times)

    def state(self, k: int) -> RegisterState:
        return RegisterState(self.amplitudes[k], self.basis)

    def norms(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)

    def level_population(self, molecule: Molecule, label: str) -> np.ndarray:
        """Reduced population of ``label`` on one molecule at every sample."""
        n_a, n_b = self.basis.dims
        pops = (np.abs(self.amplitudes) ** 2).reshape(-1, n_a, n_b)
        if molecule == "A":
            return pops[:, self.basis.labels_a.index(label), :].sum(axis=1)
        return pops[:, :, self.basis.labels_b.index(label)].sum(axis=1)


# --- Hamiltonian assembly ---------------------------------------------------

def effective_dipoles(mol: MoleculeSpec, dc_field: float = 0.0) -> np.ndarray:
    """Lab-frame dipole of each level (Debye) under a DC field.

    N=0 levels with a body-frame dipole get the Stark-mixed value; the
    others keep their zero-field dipole (intrinsic or rotational-transition).
    """
    out = np.empty(len(mol.levels))
    for i, lv in enumerate(mol.levels):
        if (
            dc_field > 0
            and lv.rotational_N == 0
            and lv.permanent_dipole > 0
            and mol.rotational_constant_B is not None
        ):
            out[i] = stark_mixed_dipole(lv.permanent_dipole, mol.rotational_constant_B, dc_field)
        else:
            out[i] = mol.zero_field_dipole(lv.label)
    return out


def _drive_matrix(mol: MoleculeSpec, pulses: Sequence[PulseSpec]) -> np.ndarray:
    n = len(mol.levels)
    h = np.zeros((n, n), dtype=complex)
    for p in pulses:
        src, dst = p.transition
        try:
            i, j = mol.labels.index(src), mol.labels.index(dst)
        except ValueError:
            raise UnknownLabel(f"{mol.name}: pulse transition {src}->{dst} names an unknown level") from None
        h[j, j] -= p.detuning
        coupling = 0.5 * p.rabi * np.exp(1j * p.phase)
        h[j, i] += coupling
        h[i, j] += np.conj(coupling)
    return h


def segment_hamiltonian(
    schedule: Schedule, t: float, system: System, include_decay: bool = False
) -> HermitianOperator:
    """Rotating-frame H/hbar (rad/s) in force at time ``t``."""
    slack = _TIME_EPS * max(schedule.total_time, 1e-300)
    if not -slack <= t <= schedule.total_time + slack:
        raise InvalidTime(f"t={t} outside schedule [0, {schedule.total_time}]")
    mol_a, mol_b = system.molecule_a, system.molecule_b
    active = schedule.active_pulses(t)
    h_a = _drive_matrix(mol_a, [p for p in active if p.molecule == "A"])
    h_b = _drive_matrix(mol_b, [p for p in active if p.molecule == "B"])
    n_a, n_b = len(mol_a.levels), len(mol_b.levels)
    h = np.kron(h_a, np.eye(n_b)) + np.kron(np.eye(n_a), h_b)

    dc = schedule.dc_field(t)
    d_a = effective_dipoles(mol_a, dc)
    d_b = effective_dipoles(mol_b, dc)
    if np.any(d_a) and np.any(d_b):
        h += np.diag(unit_dipole_rate(system.geometry) * np.outer(d_a, d_b).ravel())

    decay = None
    if include_decay:
        g_a = np.array([lv.decay_rate for lv in mol_a.levels])
        g_b = np.array([lv.decay_rate for lv in mol_b.levels])
        decay = np.add.outer(g_a, g_b).ravel()
    return HermitianOperator(h, system.basis, decay)


# --- propagation ------------------------------------------------------------

class _SegmentPropagator:
    """exp(-i G dt) for one constant generator, reusable for several dt."""

    def __init__(self, op: HermitianOperator):
        self.decay = op.has_decay
        if self.decay:
            self.generator = op.generator()
        else:
            self.evals, self.evecs = np.linalg.eigh(op.hermitian)

    def apply(self, psi: np.ndarray, dt: float) -> np.ndarray:
        return self.apply_many(psi, np.array([dt]))[0]

    def apply_many(self, psi: np.ndarray, dts: np.ndarray) -> np.ndarray:
        """States after each elapsed time in ``dts``, shape (len(dts), dim)."""
        if self.decay:
            return np.array([scipy.linalg.expm(-1j * dt * self.generator) @ psi for dt in dts])
        coeffs = self.evecs.conj().T @ psi
        return (np.exp(-1j * np.outer(dts, self.evals)) * coeffs) @ self.evecs.T


def _phase_step_vector(step: PhaseStep, basis: LevelBasis) -> np.ndarray:
    labels = basis.labels_a if step.molecule == "A" else basis.labels_b
    for label in step.phases:
        if label not in labels:
            raise UnknownLabel(f"phase step on molecule {step.molecule}: no level {label!r}")
    single = np.array([np.exp(1j * step.phases.get(lb, 0.0)) for lb in labels])
    n_a, n_b = basis.dims
    if step.molecule == "A":
        return np.kron(single, np.ones(n_b))
    return np.kron(np.ones(n_a), single)


def propagate(
    state: RegisterState,
    schedule: Schedule,
    system: System,
    opts: PropagationOptions | None = None,
) -> tuple[RegisterState, Trajectory]:
    """Evolve ``state`` through ``schedule``.

    Returns the final state and a trajectory sampled at
    ``opts.trajectory_samples`` uniform times over [0, total_time] (empty
    when zero samples are requested). Phase steps act at their instant;
    samples taken at the same time see the state after the step.
    """
    opts = opts or PropagationOptions()
    if state.basis != system.basis:
        raise ConfigError("state basis does not match the system")
    total = schedule.total_time
    basis = system.basis
    sample_times = np.linspace(0.0, total, opts.trajectory_samples)
    samples = np.empty((len(sample_times), basis.dim), dtype=complex)
    edges = np.asarray(schedule.boundaries)
    eps = _TIME_EPS * max(total, 1e-300)

    steps_at: dict[int, list[PhaseStep]] = {}
    for step in schedule.phase_steps:
        k = int(np.argmin(np.abs(edges - step.time)))
        steps_at.setdefault(k, []).append(step)

    psi = np.array(state.amplitudes, dtype=complex)
    n_done = 0
    for k in range(len(edges) - 1):
        for step in steps_at.get(k, ()):
            psi = psi * _phase_step_vector(step, basis)
        t0, t1 = edges[k], edges[k + 1]
        prop = _SegmentPropagator(
            segment_hamiltonian(schedule, 0.5 * (t0 + t1), system, opts.include_decay)
        )
        n_here = int(np.searchsorted(sample_times, t1 - eps, side="left")) - n_done
        if n_here > 0:
            dts = np.maximum(sample_times[n_done:n_done + n_here] - t0, 0.0)
            samples[n_done:n_done + n_here] = prop.apply_many(psi, dts)
            n_done += n_here
        psi = prop.apply(psi, t1 - t0)
        if not np.all(np.isfinite(psi)):
            raise NonFiniteAmplitude(f"non-finite amplitude after t={t1}")

    for step in steps_at.get(len(edges) - 1, ()):
        psi = psi * _phase_step_vector(step, basis)
    samples[n_done:] = psi
    return RegisterState(psi, basis), Trajectory(sample_times, samples, basis)


# --- phase accumulator ------------------------------------------------------

def eq1_phase(
    times: Sequence[float],
    rho_e: Sequence[float],
    rate: float,
    rho_e_b: Sequence[float] | None = None,
) -> float:
    """Interaction phase accumulated for a sampled excited fraction.

    ``rate * integral(rho_e(t)**2 dt)`` by the trapezoid rule. Passing
    ``rho_e_b`` switches to the pair convention ``rho_a(t) * rho_b(t)``,
    the natural reading when the two molecules are driven differently.
    """
    t = np.asarray(times, dtype=float)
    rho = np.asarray(rho_e, dtype=float)
    if t.size < 2:
        raise EmptyTrajectory("need at least two samples to integrate")
    if rho.shape != t.shape:
        raise ValueError("times and rho_e must have the same length")
    if rho_e_b is None:
        integrand = rho**2
    else:
        rho_b = np.asarray(rho_e_b, dtype=float)
        if rho_b.shape != t.shape:
            raise ValueError("rho_e_b must match times")
        integrand = rho * rho_b
    return float(rate * np.trapezoid(integrand, t))


def converged_eq1_phase(
    state: RegisterState,
    schedule: Schedule,
    system: System,
    rate: float,
    label: str = "e",
    pair: bool = False,
    tolerance: float = 1e-9,
    start_samples: int = 257,
    max_samples: int = 2**20 + 1,
) -> tuple[float, int]:
    """eq1_phase on a simulated excited fraction, refined until stable.

    The sampling grid is doubled until the phase changes by less than
    ``tolerance``. Returns the phase and the number of samples used.
    """
    previous = None
    n = start_samples
    while True:
        _, traj = propagate(state, schedule, system, PropagationOptions(trajectory_samples=n))
        rho_a = traj.level_population("A", label)
        rho_b = traj.level_population("B", label) if pair else None
        phase = eq1_phase(traj.times, rho_a, rate, rho_b)
        if previous is not None and abs(phase - previous) < tolerance:
            return phase, n
        if n >= max_samples:
            return phase, n
        previous = phase
        n = 2 * n - 1
