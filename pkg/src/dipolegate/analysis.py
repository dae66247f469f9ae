"""Gate extraction, blockade scans and thermal-motion error budgets."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.optimize import minimize

from .dynamics import PropagationOptions, Schedule, System, propagate
from .errors import BlockadeRegimeWarning, ConfigError, DegenerateGate, InvalidSigma
from .molecules import Architecture
from .protocols import SchemeParams, build_blockade, with_blockade_ratio
from .state import product_state
from .units import dipole_dipole_rate

COMPUTATIONAL = (("0", "0"), ("0", "1"), ("1", "0"), ("1", "1"))
CZ_DIAGONAL = np.array([1, 1, 1, -1], dtype=complex)
# local Z exponents of |00>,|01>,|10>,|11> for molecules A and B
_Z_A = np.array([0, 0, 1, 1])
_Z_B = np.array([0, 1, 0, 1])
BELL_GRID = 64


def wrap_phase(x):
    """Map phases onto [-pi/2, 3pi/2).

    Both 0 and pi sit well inside the interval, so gate phases near either
    value never flip sign across a branch cut.
    """
    return np.mod(np.asarray(x, dtype=float) + 0.5 * math.pi, 2.0 * math.pi) - 0.5 * math.pi


def entangling_phase(phases: Sequence[float]) -> float:
    p00, p01, p10, p11 = phases
    return float(wrap_phase(p00 - p01 - p10 + p11))


def phase_distance(a: float, b: float) -> float:
    """Distance between two angles on the circle."""
    d = math.fmod(abs(a - b), 2.0 * math.pi)
    return min(d, 2.0 * math.pi - d)


@dataclass
class GateResult:
    phases: tuple[float, float, float, float]
    entangling_phase_chi: float
    leakage: tuple[float, float, float, float]
    success_probability: float
    bell_fidelity: float
    metadata: dict[str, Any] = field(default_factory=dict)
    # columns: final computational amplitudes for inputs |00>, |01>, |10>, |11>
    computational_block: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def leakage_max(self) -> float:
        return max(self.leakage)

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out.pop("computational_block")
        out["phases"] = list(self.phases)
        out["leakage"] = list(self.leakage)
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "GateResult":
        return cls(
            phases=tuple(data["phases"]),
            entangling_phase_chi=data["entangling_phase_chi"],
            leakage=tuple(data["leakage"]),
            success_probability=data["success_probability"],
            bell_fidelity=data["bell_fidelity"],
            metadata=dict(data.get("metadata", {})),
        )

    def csv_row(self) -> dict[str, float]:
        p00, p01, p10, p11 = self.phases
        return {
            "phi00": p00, "phi01": p01, "phi10": p10, "phi11": p11,
            "chi": self.entangling_phase_chi,
            "leakage_max": self.leakage_max,
            "success_prob": self.success_probability,
            "bell_fidelity": self.bell_fidelity,
        }


def bell_fidelity(block: np.ndarray, target: np.ndarray = CZ_DIAGONAL) -> float:
    """Overlap of the gate's output on |++> with the target's, best over local Z.

    ``block`` is the 4x4 computational block of the simulated gate and
    ``target`` the diagonal of the ideal gate. The fidelity
    |<target(++)| Z_A(a) Z_B(b) U |++>|^2 is maximised over the two local
    phases; a global phase drops out of the modulus. Search: a 64 x 64 grid
    over [0, 2pi)^2, then Nelder-Mead from the best node down to 1e-8 rad.
    """
    psi = block @ np.full(4, 0.5)
    weights = np.conj(0.5 * np.asarray(target)) * psi

    def fid(ab: np.ndarray) -> float:
        return float(abs(np.sum(weights * np.exp(1j * (ab[0] * _Z_A + ab[1] * _Z_B)))) ** 2)

    grid = np.linspace(0.0, 2.0 * math.pi, BELL_GRID, endpoint=False)
    aa, bb = np.meshgrid(grid, grid, indexing="ij")
    phase = np.exp(1j * (aa[..., None] * _Z_A + bb[..., None] * _Z_B))
    values = np.abs(np.sum(weights * phase, axis=-1)) ** 2
    i, j = np.unravel_index(np.argmax(values), values.shape)
    res = minimize(
        lambda ab: -fid(ab),
        x0=np.array([grid[i], grid[j]]),
        method="Nelder-Mead",
        options={"xatol": 1e-8, "fatol": 1e-15},
    )
    return float(min(1.0, max(values[i, j], -res.fun)))


def extract_gate(
    schedule: Schedule, system: System, opts: PropagationOptions | None = None
) -> GateResult:
    """Run the four computational basis states through ``schedule``.

    Phases are the arguments of the amplitudes that return to the input
    state. Leakage counts population that did not return, excluding norm
    lost to decay. A returning amplitude below 0.5 in magnitude raises
    :class:`DegenerateGate`.
    """
    opts = opts or PropagationOptions()
    opts = PropagationOptions(include_decay=opts.include_decay, tolerance=opts.tolerance)
    basis = system.basis
    comp_idx = [basis.index(a, b) for a, b in COMPUTATIONAL]
    block = np.empty((4, 4), dtype=complex)
    phases, leakage, norms = [], [], []
    for col, (a, b) in enumerate(COMPUTATIONAL):
        final, _ = propagate(product_state(basis, a, b), schedule, system, opts)
        amp = final.amplitudes[comp_idx[col]]
        if abs(amp) < 0.5:
            raise DegenerateGate(f"|{a}{b}> returned with amplitude {abs(amp):.3g}; the scheme broke down")
        block[:, col] = final.amplitudes[comp_idx]
        norm2 = final.norm_squared
        phases.append(float(wrap_phase(np.angle(amp))))
        leakage.append(float(min(1.0, max(0.0, norm2 - abs(amp) ** 2))))
        norms.append(norm2)
    return GateResult(
        phases=tuple(phases),
        entangling_phase_chi=entangling_phase(phases),
        leakage=tuple(leakage),
        success_probability=float(min(norms)),
        bell_fidelity=bell_fidelity(block),
        metadata={"warnings": list(schedule.metadata.get("warnings", []))},
        computational_block=block,
    )


def cz_equivalent(result: GateResult, tol: float = 1e-3) -> bool:
    return phase_distance(result.entangling_phase_chi, math.pi) <= tol


# --- blockade scan ----------------------------------------------------------

@dataclass
class ScanRow:
    ratio: float
    infidelity: float
    leakage: float


@dataclass
class ScanResult:
    rows: list[ScanRow]

    def __post_init__(self) -> None:
        ratios = [row.ratio for row in self.rows]
        if any(b <= a for a, b in zip(ratios, ratios[1:])):
            raise ConfigError("scan ratios must be strictly increasing")

    def loglog_slope(self, first: int = 0, last: int = -1) -> float:
        a, b = self.rows[first], self.rows[last]
        return math.log(b.infidelity / a.infidelity) / math.log(b.ratio / a.ratio)


def blockade_scan(
    base: SchemeParams, ratios: Sequence[float], opts: PropagationOptions | None = None
) -> ScanResult:
    """Blockade gate quality against V/Omega; V is tuned by moving the molecules."""
    ratios = [float(x) for x in ratios]
    if not ratios or any(x <= 0 for x in ratios):
        raise ConfigError("ratios must be positive")
    if any(b <= a for a, b in zip(ratios, ratios[1:])):
        raise ConfigError("ratios must be strictly increasing")
    rows = []
    for ratio in ratios:
        params = with_blockade_ratio(base, ratio)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BlockadeRegimeWarning)
            schedule = build_blockade(params)
        res = extract_gate(schedule, params.system, opts)
        rows.append(ScanRow(ratio, 1.0 - res.bell_fidelity, res.leakage_max))
    return ScanResult(rows)


# --- thermal motion ---------------------------------------------------------

@dataclass
class MonteCarloResult:
    samples: int
    phase_mean: float
    phase_std: float
    relative_spread: float
    seed: int

    def csv_row(self) -> dict[str, float | int]:
        return asdict(self)


def merge_moments(a: tuple[int, float, float], b: tuple[int, float, float]) -> tuple[int, float, float]:
    """Combine (count, mean, sum of squared deviations) of two batches."""
    n_a, mean_a, m2_a = a
    n_b, mean_b, m2_b = b
    n = n_a + n_b
    if n == 0:
        return 0, 0.0, 0.0
    delta = mean_b - mean_a
    mean = mean_a + delta * n_b / n
    m2 = m2_a + m2_b + delta * delta * n_a * n_b / n
    return n, mean, m2


def thermal_sigma_from_temperature(T: float, mass: float, trap_omega: float) -> float:
    """Thermal position spread of one molecule in a harmonic trap (m)."""
    if T < 0 or not mass > 0 or not trap_omega > 0:
        raise ValueError("need T >= 0, mass > 0, trap_omega > 0")
    from .constants import KB

    return math.sqrt(KB * T / (mass * trap_omega**2))


def separation_sigma(per_molecule_sigma: float) -> float:
    """Spread of the separation of two independently jittering molecules."""
    return math.sqrt(2.0) * per_molecule_sigma


def _phase_batch(
    seed_seq: np.random.SeedSequence, n: int, r0: float, sigma: float, phase0: float, power: float
) -> tuple[int, float, float]:
    if sigma == 0.0:
        return n, phase0, 0.0
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    r = r0 + sigma * rng.standard_normal(n)
    bad = r <= 0
    while np.any(bad):
        r[bad] = r0 + sigma * rng.standard_normal(int(bad.sum()))
        bad = r <= 0
    phase = phase0 * (r0 / r) ** power
    mean = float(phase.mean())
    return n, mean, float(np.sum((phase - mean) ** 2))


def thermal_phase_spread(
    system: System,
    schedule: Schedule,
    sep_sigma: float,
    samples: int,
    seed: int,
    batch_size: int = 65536,
    workers: int = 1,
) -> MonteCarloResult:
    """Spread of the interaction phase under a static jitter of the separation.

    Each sample draws r' = r + N(0, sep_sigma) (redrawing r' <= 0) and
    recomputes the phase with the schedule's interaction time held fixed.
    Batches use child streams of ``np.random.SeedSequence(seed)`` with the
    PCG64 generator, so the result depends on the seed and batch size but
    not on ``workers``; batch moments are merged pairwise.
    """
    if not sep_sigma >= 0 or not math.isfinite(sep_sigma):
        raise InvalidSigma("sep_sigma must be finite and >= 0")
    if samples < 100:
        raise ConfigError("thermal Monte Carlo needs at least 100 samples")
    info = schedule.metadata.get("interaction")
    if info is None:
        raise ConfigError("schedule carries no interaction metadata; build it with the protocols module")
    geom = system.geometry
    d_a, d_b = info["dipoles_debye"]
    phase0 = dipole_dipole_rate(d_a, d_b, geom) * info["time_s"]
    power = 1.0 if geom.architecture is Architecture.WIRE else 3.0

    sizes = [batch_size] * (samples // batch_size)
    if samples % batch_size:
        sizes.append(samples % batch_size)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [(child, n, geom.r, sep_sigma, phase0, power) for child, n in zip(children, sizes)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _phase_batch(*job), jobs))
    else:
        parts = [_phase_batch(*job) for job in jobs]

    total = (0, 0.0, 0.0)
    for part in parts:
        total = merge_moments(total, part)
    n, mean, m2 = total
    std = math.sqrt(m2 / (n - 1))
    spread = std / abs(mean) if mean != 0 else math.inf
    return MonteCarloResult(samples=n, phase_mean=mean, phase_std=std, relative_spread=spread, seed=seed)
