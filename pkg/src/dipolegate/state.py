"""Two-molecule product basis, register states and operators.

Ordering: levels follow the MoleculeSpec declaration order and molecule A
is the slow index, so ``flat = iA * nB + iB``. Everything is dense; the
largest register is 5 x 5 levels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import BasisMismatch, ConfigError, UnknownLabel, ZeroVector
from .molecules import MoleculeSpec


@dataclass(frozen=True)
class LevelBasis:
    labels_a: tuple[str, ...]
    labels_b: tuple[str, ...]

    @classmethod
    def for_molecules(cls, mol_a: MoleculeSpec, mol_b: MoleculeSpec) -> "LevelBasis":
        return cls(mol_a.labels, mol_b.labels)

    @property
    def dims(self) -> tuple[int, int]:
        return len(self.labels_a), len(self.labels_b)

    @property
    def dim(self) -> int:
        return len(self.labels_a) * len(self.labels_b)

    def index(self, label_a: str, label_b: str) -> int:
        try:
            ia = self.labels_a.index(label_a)
        except ValueError:
            raise UnknownLabel(f"molecule A has no level {label_a!r}") from None
        try:
            ib = self.labels_b.index(label_b)
        except ValueError:
            raise UnknownLabel(f"molecule B has no level {label_b!r}") from None
        return ia * len(self.labels_b) + ib

    def labels(self, flat: int) -> tuple[str, str]:
        ia, ib = divmod(flat, len(self.labels_b))
        return self.labels_a[ia], self.labels_b[ib]

    def ket_labels(self) -> list[str]:
        return [f"|{a}{b}>" for a in self.labels_a for b in self.labels_b]


@dataclass(frozen=True, eq=False)
class RegisterState:
    amplitudes: np.ndarray
    basis: LevelBasis

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.basis.dim,):
            raise ConfigError(f"expected {self.basis.dim} amplitudes, got shape {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def amplitude(self, label_a: str, label_b: str) -> complex:
        return complex(self.amplitudes[self.basis.index(label_a, label_b)])

    def populations(self) -> np.ndarray:
        """Populations as an (nA, nB) array."""
        return (np.abs(self.amplitudes) ** 2).reshape(self.basis.dims)

    def level_population(self, molecule: str, label: str) -> float:
        """Reduced population of one molecule's level."""
        pops = self.populations()
        if molecule == "A":
            return float(pops[self.basis.labels_a.index(label), :].sum())
        return float(pops[:, self.basis.labels_b.index(label)].sum())


def product_state(basis: LevelBasis, label_a: str, label_b: str) -> RegisterState:
    amps = np.zeros(basis.dim, dtype=complex)
    amps[basis.index(label_a, label_b)] = 1.0
    return RegisterState(amps, basis)


def superpose(terms: Iterable[tuple[complex, RegisterState]]) -> RegisterState:
    """Normalized linear combination of states sharing one basis."""
    terms = list(terms)
    if not terms:
        raise ZeroVector("no states to superpose")
    basis = terms[0][1].basis
    total = np.zeros(basis.dim, dtype=complex)
    for coeff, st in terms:
        if st.basis != basis:
            raise BasisMismatch("cannot superpose states from different bases")
        total += coeff * st.amplitudes
    norm = np.linalg.norm(total)
    if norm < 1e-12:
        raise ZeroVector("linear combination vanishes")
    return RegisterState(total / norm, basis)


def overlap(a: RegisterState, b: RegisterState) -> complex:
    """<a|b>."""
    if a.basis != b.basis:
        raise BasisMismatch("states live in different bases")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """H/hbar in rad/s, plus an optional diagonal decay part.

    The full generator is ``hermitian - 0.5j * diag(decay_rates)``.
    """

    hermitian: np.ndarray
    basis: LevelBasis
    decay_rates: np.ndarray | None = None

    def __post_init__(self) -> None:
        h = np.array(self.hermitian, dtype=complex)
        if h.shape != (self.basis.dim, self.basis.dim):
            raise ConfigError("operator shape does not match basis")
        scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
        if np.max(np.abs(h - h.conj().T), initial=0.0) > 1e-12 * scale:
            raise ConfigError("operator is not Hermitian")
        object.__setattr__(self, "hermitian", h)
        if self.decay_rates is not None:
            g = np.asarray(self.decay_rates, dtype=float)
            if g.shape != (self.basis.dim,) or np.any(g < 0):
                raise ConfigError("decay rates must be a non-negative vector over the basis")
            object.__setattr__(self, "decay_rates", g)

    @property
    def has_decay(self) -> bool:
        return self.decay_rates is not None and bool(np.any(self.decay_rates > 0))

    def generator(self) -> np.ndarray:
        if not self.has_decay:
            return self.hermitian
        return self.hermitian - 0.5j * np.diag(self.decay_rates)
