"""Molecule level structures, trap geometries and the preset registry.

Preset data lives in ``dipolegate/presets/*.json`` using the same schema the
CLI accepts for inline molecules (see :func:`molecule_from_dict`). Field names
carry their units; dipoles are in Debye, lifetimes and coherence times in
seconds, masses in atomic mass units, rotational constants in cm^-1.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Any, Mapping

from .constants import AMU, wavenumber_to_joule
from .errors import ConfigError, UnknownLabel


@dataclass(frozen=True)
class LevelSpec:
    """One internal level of a molecule.

    ``dipole_expectation`` is the lab-frame dipole at zero applied DC field.
    ``permanent_dipole`` is the body-frame dipole of the electronic state; it
    only matters for ``rotational_N == 0`` levels, which acquire a dipole when
    a DC field mixes in N=1. ``superposition_of`` names two rotational
    components (e.g. ``("e1", "e2")``) when the level is an equal-weight
    superposition carrying the transition dipole between them.
    """

    label: str
    dipole_expectation: float = 0.0
    lifetime: float = math.inf
    rotational_N: int | None = None
    permanent_dipole: float = 0.0
    superposition_of: tuple[str, str] | None = None

    def __post_init__(self) -> None:
        if not self.label:
            raise ConfigError("level label must be non-empty")
        if not self.lifetime > 0:
            raise ConfigError(f"level {self.label!r}: lifetime must be > 0")
        if not math.isfinite(self.dipole_expectation):
            raise ConfigError(f"level {self.label!r}: dipole must be finite")
        if not math.isfinite(self.permanent_dipole):
            raise ConfigError(f"level {self.label!r}: permanent dipole must be finite")
        if self.superposition_of is not None:
            pair = tuple(self.superposition_of)
            if len(pair) != 2 or pair[0] == pair[1]:
                raise ConfigError(f"level {self.label!r}: superposition needs two distinct components")
            object.__setattr__(self, "superposition_of", pair)

    @property
    def decay_rate(self) -> float:
        return 0.0 if math.isinf(self.lifetime) else 1.0 / self.lifetime


def _pair_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class MoleculeSpec:
    name: str
    levels: tuple[LevelSpec, ...]
    mass: float  # kg
    coherence_time: float  # s
    transition_dipoles: Mapping[tuple[str, str], float] = field(default_factory=dict)
    rotational_constant_B: float | None = None  # J
    # declared drive couplings (from, to) -> number of photons
    couplings: Mapping[tuple[str, str], int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "levels", tuple(self.levels))
        labels = [lv.label for lv in self.levels]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"{self.name}: duplicate level labels {labels}")
        if not self.mass > 0:
            raise ConfigError(f"{self.name}: mass must be > 0")
        if not self.coherence_time > 0:
            raise ConfigError(f"{self.name}: coherence_time must be > 0")
        if self.rotational_constant_B is not None and not self.rotational_constant_B > 0:
            raise ConfigError(f"{self.name}: rotational constant must be > 0")

        dipoles: dict[tuple[str, str], float] = {}
        for (a, b), d in dict(self.transition_dipoles).items():
            key = _pair_key(a, b)
            if key in dipoles and dipoles[key] != d:
                raise ConfigError(f"{self.name}: asymmetric transition dipole {a}<->{b}")
            if not math.isfinite(d):
                raise ConfigError(f"{self.name}: transition dipole {a}<->{b} not finite")
            dipoles[key] = float(d)
        object.__setattr__(self, "transition_dipoles", dipoles)

        couplings: dict[tuple[str, str], int] = {}
        for (a, b), n in dict(self.couplings).items():
            if a not in labels or b not in labels:
                raise UnknownLabel(f"{self.name}: coupling {a}<->{b} names an unknown level")
            if int(n) < 1:
                raise ConfigError(f"{self.name}: coupling photon number must be >= 1")
            couplings[_pair_key(a, b)] = int(n)
        object.__setattr__(self, "couplings", couplings)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lv.label for lv in self.levels)

    def level(self, label: str) -> LevelSpec:
        for lv in self.levels:
            if lv.label == label:
                return lv
        raise UnknownLabel(f"{self.name}: no level {label!r} (have {list(self.labels)})")

    def index(self, label: str) -> int:
        return self.labels.index(self.level(label).label)

    def transition_dipole(self, a: str, b: str) -> float:
        return self.transition_dipoles.get(_pair_key(a, b), 0.0)

    def coupling_photons(self, a: str, b: str) -> int | None:
        return self.couplings.get(_pair_key(a, b))

    def zero_field_dipole(self, label: str) -> float:
        """Dipole a level carries without a DC field, in Debye."""
        lv = self.level(label)
        if lv.superposition_of is not None:
            return self.transition_dipole(*lv.superposition_of)
        return lv.dipole_expectation

    def with_level(self, label: str, **changes: Any) -> "MoleculeSpec":
        levels = tuple(replace(lv, **changes) if lv.label == label else lv for lv in self.levels)
        if levels == self.levels and label not in self.labels:
            raise UnknownLabel(f"{self.name}: no level {label!r}")
        return replace(self, levels=levels)


class Architecture(str, enum.Enum):
    LATTICE = "lattice"
    WIRE = "wire"


@dataclass(frozen=True)
class Geometry:
    """Two-molecule placement.

    ``r`` is the separation, ``theta`` the angle between the separation
    vector and the aligned dipoles, ``h`` the molecule-wire distance (wire
    architecture only).
    """

    architecture: Architecture = Architecture.LATTICE
    r: float = 1e-6
    theta: float = 0.0
    h: float | None = None

    def __post_init__(self) -> None:
        try:
            arch = Architecture(self.architecture)
        except ValueError:
            raise ConfigError(f"unknown architecture {self.architecture!r}") from None
        object.__setattr__(self, "architecture", arch)
        if not (self.r > 0 and math.isfinite(self.r)):
            raise ConfigError("separation r must be > 0")
        if not 0.0 <= self.theta <= math.pi:
            raise ConfigError("theta must lie in [0, pi]")
        if arch is Architecture.WIRE and not (self.h is not None and self.h > 0):
            raise ConfigError("wire architecture needs a wire height h > 0")

    def with_r(self, r: float) -> "Geometry":
        return replace(self, r=r)


# --- structured-text (de)serialization --------------------------------------

_MOLECULE_KEYS = {
    "name", "mass_amu", "coherence_time_s", "rotational_constant_cm1",
    "levels", "transition_dipoles", "couplings",
}
_LEVEL_KEYS = {
    "label", "dipole_debye", "lifetime_s", "rotational_N",
    "permanent_dipole_debye", "superposition_of",
}
_GEOMETRY_KEYS = {"architecture", "r_m", "theta_rad", "h_m"}


def check_keys(data: Mapping[str, Any], allowed: set[str], where: str, required: set[str] = frozenset()) -> None:
    if not isinstance(data, Mapping):
        raise ConfigError(f"{where}: expected an object, got {type(data).__name__}")
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = set(required) - set(data)
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")


def _level_from_dict(data: Mapping[str, Any], where: str) -> LevelSpec:
    check_keys(data, _LEVEL_KEYS, where, {"label"})
    lifetime = data.get("lifetime_s")
    sup = data.get("superposition_of")
    return LevelSpec(
        label=str(data["label"]),
        dipole_expectation=float(data.get("dipole_debye", 0.0)),
        lifetime=math.inf if lifetime is None else float(lifetime),
        rotational_N=data.get("rotational_N"),
        permanent_dipole=float(data.get("permanent_dipole_debye", 0.0)),
        superposition_of=None if sup is None else tuple(sup),
    )


def molecule_from_dict(data: Mapping[str, Any]) -> MoleculeSpec:
    name = data.get("name", "<inline>") if isinstance(data, Mapping) else "<inline>"
    check_keys(data, _MOLECULE_KEYS, f"molecule {name}", {"name", "mass_amu", "coherence_time_s", "levels"})
    levels = tuple(
        _level_from_dict(lv, f"molecule {name} level {i}") for i, lv in enumerate(data["levels"])
    )
    tdm = {}
    for entry in data.get("transition_dipoles", []):
        check_keys(entry, {"levels", "dipole_debye"}, f"molecule {name} transition_dipoles", {"levels", "dipole_debye"})
        a, b = entry["levels"]
        tdm[(a, b)] = float(entry["dipole_debye"])
    couplings = {}
    for entry in data.get("couplings", []):
        check_keys(entry, {"levels", "photons"}, f"molecule {name} couplings", {"levels"})
        a, b = entry["levels"]
        couplings[(a, b)] = int(entry.get("photons", 1))
    b_cm = data.get("rotational_constant_cm1")
    return MoleculeSpec(
        name=str(data["name"]),
        levels=levels,
        mass=float(data["mass_amu"]) * AMU,
        coherence_time=float(data["coherence_time_s"]),
        transition_dipoles=tdm,
        rotational_constant_B=None if b_cm is None else wavenumber_to_joule(float(b_cm)),
        couplings=couplings,
    )


def molecule_to_dict(mol: MoleculeSpec) -> dict[str, Any]:
    from .constants import C_LIGHT, PLANCK

    levels = []
    for lv in mol.levels:
        entry: dict[str, Any] = {"label": lv.label, "dipole_debye": lv.dipole_expectation}
        entry["lifetime_s"] = None if math.isinf(lv.lifetime) else lv.lifetime
        if lv.rotational_N is not None:
            entry["rotational_N"] = lv.rotational_N
        if lv.permanent_dipole:
            entry["permanent_dipole_debye"] = lv.permanent_dipole
        if lv.superposition_of is not None:
            entry["superposition_of"] = list(lv.superposition_of)
        levels.append(entry)
    out: dict[str, Any] = {
        "name": mol.name,
        "mass_amu": mol.mass / AMU,
        "coherence_time_s": mol.coherence_time,
        "levels": levels,
        "transition_dipoles": [
            {"levels": list(k), "dipole_debye": v} for k, v in mol.transition_dipoles.items()
        ],
        "couplings": [{"levels": list(k), "photons": v} for k, v in mol.couplings.items()],
    }
    if mol.rotational_constant_B is not None:
        out["rotational_constant_cm1"] = mol.rotational_constant_B / (PLANCK * C_LIGHT * 100.0)
    return out


def geometry_from_dict(data: Mapping[str, Any]) -> Geometry:
    check_keys(data, _GEOMETRY_KEYS, "geometry", {"architecture", "r_m"})
    h = data.get("h_m")
    return Geometry(
        architecture=str(data["architecture"]).lower(),
        r=float(data["r_m"]),
        theta=float(data.get("theta_rad", 0.0)),
        h=None if h is None else float(h),
    )


def geometry_to_dict(geom: Geometry) -> dict[str, Any]:
    out: dict[str, Any] = {"architecture": geom.architecture.value, "r_m": geom.r, "theta_rad": geom.theta}
    if geom.h is not None:
        out["h_m"] = geom.h
    return out


# --- presets ----------------------------------------------------------------

def preset_names() -> list[str]:
    files = resources.files("dipolegate").joinpath("presets").iterdir()
    return sorted(f.name[:-5] for f in files if f.name.endswith(".json"))


def load_preset_data(name: str) -> dict[str, Any]:
    lookup = {n.lower(): n for n in preset_names()}
    key = lookup.get(name.lower())
    if key is None:
        raise ConfigError(f"unknown molecule preset {name!r}; available: {preset_names()}")
    text = resources.files("dipolegate").joinpath("presets", f"{key}.json").read_text()
    return json.loads(text)


def get_preset(name: str, **level_overrides: float) -> MoleculeSpec:
    """Load a preset molecule.

    Keyword arguments ``<label>_dipole=value`` override a level's zero-field
    dipole, e.g. ``get_preset("RbCs", e_dipole=1.2)``.
    """
    mol = molecule_from_dict(load_preset_data(name))
    for key, value in level_overrides.items():
        if not key.endswith("_dipole"):
            raise ConfigError(f"unsupported preset override {key!r}")
        mol = mol.with_level(key[: -len("_dipole")], dipole_expectation=float(value))
    return mol
