import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from dipolegate.dynamics import (
    DCFieldSpec,
    PhaseStep,
    PropagationOptions,
    PulseSpec,
    Schedule,
    System,
    converged_eq1_phase,
    eq1_phase,
    propagate,
    segment_hamiltonian,
)
from dipolegate.errors import ConfigError, EmptyTrajectory, InvalidTime, NonFiniteAmplitude, UnknownLabel
from dipolegate.molecules import Geometry, get_preset
from dipolegate.state import product_state

OMEGA = 2 * math.pi * 1e5
# hypothesis tests cannot take function-scoped fixtures
CO_SYSTEM = System(get_preset("CO"), get_preset("CO"), Geometry("lattice", r=1e-6))


def pulse(mol="A", area=math.pi, t0=0.0, phase=0.0, detuning=0.0, rabi=OMEGA):
    return PulseSpec(mol, ("1", "e"), rabi, t0, area / rabi, detuning=detuning, phase=phase)


def test_pulse_validation():
    with pytest.raises(ConfigError):
        PulseSpec("C", ("1", "e"), 1.0, 0.0, 1.0)
    with pytest.raises(ConfigError):
        PulseSpec("A", ("1", "e"), 1.0, 0.0, 0.0)
    with pytest.raises(ConfigError):
        Schedule([pulse(t0=1.0)], total_time=1.0)
    with pytest.raises(ConfigError):
        PropagationOptions(tolerance=1e-3)


def test_free_hamiltonian_is_diagonal_interaction(co_system):
    op = segment_hamiltonian(Schedule.empty(1.0), 0.5, co_system)
    h = op.hermitian
    np.testing.assert_allclose(h, np.diag(np.diag(h)))
    basis = co_system.basis
    assert h[basis.index("e", "e"), basis.index("e", "e")].real == pytest.approx(4.27e3, rel=1e-3)
    # |0>, |1> carry no dipole in the CO preset
    assert h[basis.index("e", "1"), basis.index("e", "1")] == 0.0
    with pytest.raises(InvalidTime):
        segment_hamiltonian(Schedule.empty(1.0), 2.0, co_system)


def test_pulse_hamiltonian_entries(co_system):
    sched = Schedule([pulse(phase=0.3, detuning=5.0)], total_time=1.0)
    h = segment_hamiltonian(sched, 0.0, co_system).hermitian
    basis = co_system.basis
    i, j = basis.index("1", "0"), basis.index("e", "0")
    assert h[j, i] == pytest.approx(0.5 * OMEGA * np.exp(0.3j))
    assert h[i, j] == pytest.approx(0.5 * OMEGA * np.exp(-0.3j))
    assert h[j, j] == pytest.approx(-5.0)
    # |0> is a spectator
    k = basis.index("0", "0")
    assert np.count_nonzero(h[k]) == 0


def test_pulse_unknown_transition(co_system):
    bad = PulseSpec("A", ("1", "x"), OMEGA, 0.0, 1e-6)
    with pytest.raises(UnknownLabel):
        segment_hamiltonian(Schedule([bad], 1e-6), 0.0, co_system)


def test_pi_and_two_pi_pulses(co_system):
    start = product_state(co_system.basis, "1", "0")
    final, _ = propagate(start, Schedule([pulse()], math.pi / OMEGA), co_system)
    assert final.amplitude("e", "0") == pytest.approx(-1j, abs=1e-12)
    final, _ = propagate(start, Schedule([pulse(area=2 * math.pi)], 2 * math.pi / OMEGA), co_system)
    assert final.amplitude("1", "0") == pytest.approx(-1.0, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(area=st.floats(0.0, 4 * math.pi), delta=st.floats(-2.0, 2.0), phase=st.floats(0, 2 * math.pi))
def test_detuned_rabi_matches_analytic(area, delta, phase):
    # two-level oracle with H = [[0, W/2 e^-ip], [W/2 e^ip, -D]]
    rabi, detuning = OMEGA, delta * OMEGA
    t = max(area, 1e-3) / rabi
    p = PulseSpec("B", ("1", "e"), rabi, 0.0, t, detuning=detuning, phase=phase)
    final, _ = propagate(product_state(CO_SYSTEM.basis, "0", "1"), Schedule([p], t), CO_SYSTEM)
    gen = math.hypot(rabi, detuning)
    c = math.cos(gen * t / 2)
    s = math.sin(gen * t / 2)
    # move to the frame symmetric about the two levels: global phase exp(-i D t/2)
    g = np.exp(-1j * (-detuning) * t / 2)
    amp_1 = g * (c - 1j * (detuning / gen) * s)
    amp_e = g * (-1j * (rabi / gen) * np.exp(1j * phase) * s)
    assert final.amplitude("0", "1") == pytest.approx(amp_1, abs=1e-10)
    assert final.amplitude("0", "e") == pytest.approx(amp_e, abs=1e-10)


def test_free_ee_evolution_gives_minus_sign(co_system):
    tau = math.pi / segment_hamiltonian(Schedule.empty(1.0), 0.0, co_system).hermitian[8, 8].real
    final, _ = propagate(product_state(co_system.basis, "e", "e"), Schedule.empty(tau), co_system)
    assert final.amplitude("e", "e") == pytest.approx(-1.0, abs=1e-12)


def test_phase_step_and_dc(lics_system):
    sched = Schedule([], 1e-3, phase_steps=[PhaseStep("B", {"1": 0.7}, 5e-4)])
    final, traj = propagate(
        product_state(lics_system.basis, "0", "1"), sched, lics_system, PropagationOptions(trajectory_samples=3)
    )
    assert final.amplitude("0", "1") == pytest.approx(np.exp(0.7j))
    # the midpoint sample already sees the step
    assert traj.amplitudes[1, lics_system.basis.index("0", "1")] == pytest.approx(np.exp(0.7j))
    assert traj.amplitudes[0, lics_system.basis.index("0", "1")] == 1.0
    with pytest.raises(UnknownLabel):
        propagate(
            product_state(lics_system.basis, "0", "1"),
            Schedule([], 1.0, phase_steps=[PhaseStep("A", {"q": 1.0}, 0.0)]),
            lics_system,
        )
    dc = Schedule([], 1e-3, dc_intervals=[DCFieldSpec(1e5, 0.0, 1e-3)])
    h = segment_hamiltonian(dc, 0.0, lics_system).hermitian
    assert h[0, 0].real > 0  # induced dipoles interact head to tail
    assert segment_hamiltonian(Schedule.empty(1e-3), 0.0, lics_system).hermitian[0, 0] == 0.0


def _direct_schedule(system, hold, rabi):
    t = math.pi / rabi
    pulses = []
    for mol in ("A", "B"):
        pulses.append(pulse(mol, rabi=rabi))
        pulses.append(pulse(mol, t0=t + hold, phase=math.pi, rabi=rabi))
    return Schedule(pulses, 2 * t + hold)


def test_matches_ode_oracle(co_system):
    # independent check with an adaptive ODE solver on the same Hamiltonian
    rabi = 2 * math.pi * 2e3
    sched = _direct_schedule(co_system, 2e-4, rabi)
    start = product_state(co_system.basis, "1", "1")
    final, _ = propagate(start, sched, co_system)

    def rhs(t, y):
        return -1j * (segment_hamiltonian(sched, min(t, sched.total_time), co_system).hermitian @ y)

    psi = np.array(start.amplitudes)
    edges = sched.boundaries
    for t0, t1 in zip(edges, edges[1:]):
        h = segment_hamiltonian(sched, 0.5 * (t0 + t1), co_system).hermitian
        sol = solve_ivp(lambda t, y: -1j * (h @ y), (t0, t1), psi, rtol=1e-11, atol=1e-12, method="DOP853")
        psi = sol.y[:, -1]
    np.testing.assert_allclose(final.amplitudes, psi, atol=1e-8)


def test_norm_conserved_and_decay_monotone(co_system):
    rabi = 2 * math.pi * 1e6
    sched = _direct_schedule(co_system, 0.05, rabi)
    start = product_state(co_system.basis, "1", "1")
    _, traj = propagate(start, sched, co_system, PropagationOptions(trajectory_samples=201))
    assert np.max(np.abs(traj.norms() - 1.0)) < 1e-10
    _, traj = propagate(start, sched, co_system, PropagationOptions(include_decay=True, trajectory_samples=201))
    norms = traj.norms()
    assert np.all(np.diff(norms) <= 1e-15)
    # |ee> decays at twice the single-molecule rate for most of the hold
    assert norms[-1] == pytest.approx(math.exp(-2 * 10.0 * 0.05), rel=0.05)


@settings(max_examples=20, deadline=None)
@given(frac=st.floats(0.01, 0.99))
def test_segment_split_insensitive(frac):
    rabi = 2 * math.pi * 2e3
    sched = _direct_schedule(CO_SYSTEM, 1e-4, rabi)
    start = product_state(CO_SYSTEM.basis, "1", "1")
    whole, _ = propagate(start, sched, CO_SYSTEM)
    cut = frac * sched.total_time
    mid, _ = propagate(start, sched.window(0.0, cut), CO_SYSTEM)
    end, _ = propagate(mid, sched.window(cut, sched.total_time), CO_SYSTEM)
    np.testing.assert_allclose(end.amplitudes, whole.amplitudes, atol=1e-10)


def test_window_validation(co_system):
    with pytest.raises(InvalidTime):
        Schedule.empty(1.0).window(0.5, 0.2)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_non_finite_detected(co_system):
    sched = Schedule([PulseSpec("A", ("1", "e"), 1e308, 0.0, 1e300)], 1e300)
    with pytest.raises(NonFiniteAmplitude):
        propagate(product_state(co_system.basis, "1", "0"), sched, co_system)


# --- eq1 phase --------------------------------------------------------------

def test_eq1_constant_and_ramps():
    t = np.linspace(0.0, 1.0, 1001)
    assert eq1_phase(t, np.ones_like(t), math.pi) == pytest.approx(math.pi, rel=1e-12)
    assert eq1_phase(t, np.zeros_like(t), math.pi) == 0.0
    # sin^2 excitation: integral of sin^4 over a half period is 3T/8
    rho = np.sin(math.pi * t) ** 2
    assert eq1_phase(t, rho, 1.0) == pytest.approx(3 / 8, rel=1e-6)
    assert eq1_phase(t, np.ones_like(t), 2.0, rho_e_b=0.5 * np.ones_like(t)) == pytest.approx(1.0)
    with pytest.raises(EmptyTrajectory):
        eq1_phase([0.0], [1.0], 1.0)
    with pytest.raises(ValueError):
        eq1_phase([0.0, 1.0], [1.0], 1.0)


def test_converged_eq1_on_simulated_trajectory(co_system):
    rabi = 2 * math.pi * 1e6
    hold = 2e-4
    sched = _direct_schedule(co_system, hold, rabi)
    rate = segment_hamiltonian(Schedule.empty(1.0), 0.0, co_system).hermitian[8, 8].real
    phase, n = converged_eq1_phase(product_state(co_system.basis, "1", "1"), sched, co_system, rate)
    # hold plus two sin^4 ramps of area pi
    expected = rate * (hold + 2 * (3 * math.pi / 8) / rabi)
    assert phase == pytest.approx(expected, rel=1e-6)
    assert n > 257
