"""Scenario configuration documents.

A scenario is one JSON object. Every section is optional except where a
subcommand needs it; unknown keys anywhere are errors. Example::

    {
      "molecules": {"A": "NaCl", "B": "NaCl"},
      "geometry": {"architecture": "wire", "r_m": 1e-5, "h_m": 1e-7},
      "scheme": {"name": "rotational", "instantaneous_pulses": true},
      "estimate": {"coherence_time_s": [0.1, 1.0]},
      "seed": 7
    }

A molecule entry is a preset name, ``{"preset": name, "dipoles_debye":
{label: value}}`` to override zero-field level dipoles, or an inline
molecule in the preset file schema. ``"molecule"`` is shorthand for the
same molecule at both sites.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .dynamics import PropagationOptions, System
from .errors import ConfigError
from .molecules import (
    Geometry,
    MoleculeSpec,
    check_keys,
    geometry_from_dict,
    get_preset,
    molecule_from_dict,
)
from .protocols import Scheme, SchemeParams, with_blockade_ratio

_TOP_KEYS = {
    "molecule", "molecules", "geometry", "scheme", "propagation",
    "estimate", "gate", "blockade_scan", "thermal", "output", "seed",
}
_SCHEME_KEYS = {
    "name", "pulse_rabi_rad_s", "instantaneous_pulses", "rho_e_target",
    "dc_field_v_m", "area_factor", "blockade_ratio",
}
_PROP_KEYS = {"include_decay", "trajectory_samples", "tolerance"}
_ESTIMATE_KEYS = {"coherence_time_s"}
_GATE_KEYS = {"cz_tolerance"}
_SCAN_KEYS = {"ratios"}
_THERMAL_KEYS = {
    "sep_sigma_m", "sep_sigma_fraction", "temperature_K", "trap_omega_rad_s",
    "samples", "batch_size", "workers",
}
_OUTPUT_KEYS = {"dir", "format"}
MAX_SEED = 2**64 - 1


def _molecule(entry: Any, where: str) -> MoleculeSpec:
    if isinstance(entry, str):
        return get_preset(entry)
    if isinstance(entry, Mapping) and "preset" in entry:
        check_keys(entry, {"preset", "dipoles_debye"}, where)
        mol = get_preset(str(entry["preset"]))
        for label, value in dict(entry.get("dipoles_debye", {})).items():
            mol = mol.with_level(label, dipole_expectation=float(value))
        return mol
    if isinstance(entry, Mapping):
        return molecule_from_dict(entry)
    raise ConfigError(f"{where}: expected a preset name or a molecule object")


def _seed(value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value <= MAX_SEED:
        raise ConfigError(f"seed must be an integer in [0, 2^64), got {value!r}")
    return value


@dataclass
class ScenarioConfig:
    system: System
    scheme: SchemeParams | None
    propagation: PropagationOptions
    blockade_ratio: float | None = None
    coherence_times: list[float] | None = None
    cz_tolerance: float = 1e-3
    scan_ratios: list[float] = field(default_factory=lambda: [10.0, 30.0, 100.0, 300.0])
    thermal: dict[str, Any] = field(default_factory=dict)
    output_dir: str | None = None
    output_format: str | None = None
    seed: int = 0

    def scheme_params(self) -> SchemeParams:
        if self.scheme is None:
            raise ConfigError("this command needs a 'scheme' section")
        if self.blockade_ratio is not None:
            return with_blockade_ratio(self.scheme, self.blockade_ratio)
        return self.scheme


def parse_config(data: Mapping[str, Any]) -> ScenarioConfig:
    """Validate a scenario document and build the domain objects it names."""
    check_keys(data, _TOP_KEYS, "config")
    if "molecule" in data and "molecules" in data:
        raise ConfigError("config: give either 'molecule' or 'molecules', not both")
    if "molecule" in data:
        mol_a = mol_b = _molecule(data["molecule"], "molecule")
    elif "molecules" in data:
        mols = data["molecules"]
        check_keys(mols, {"A", "B"}, "molecules", {"A", "B"})
        mol_a = _molecule(mols["A"], "molecules.A")
        mol_b = _molecule(mols["B"], "molecules.B")
    else:
        raise ConfigError("config: missing 'molecule' or 'molecules'")
    if "geometry" not in data:
        raise ConfigError("config: missing 'geometry'")
    geometry: Geometry = geometry_from_dict(data["geometry"])
    system = System(mol_a, mol_b, geometry)

    prop = data.get("propagation", {})
    check_keys(prop, _PROP_KEYS, "propagation")
    propagation = PropagationOptions(
        include_decay=bool(prop.get("include_decay", False)),
        trajectory_samples=int(prop.get("trajectory_samples", 0)),
        tolerance=float(prop.get("tolerance", 1e-9)),
    )

    scheme = None
    blockade_ratio = None
    if "scheme" in data:
        sch = data["scheme"]
        check_keys(sch, _SCHEME_KEYS, "scheme", {"name"})
        scheme = SchemeParams(
            scheme=str(sch["name"]).lower(),
            system=system,
            pulse_rabi=float(sch.get("pulse_rabi_rad_s", 0.0)),
            instantaneous_pulses=bool(sch.get("instantaneous_pulses", False)),
            rho_e_target=float(sch.get("rho_e_target", 1.0)),
            dc_field=float(sch.get("dc_field_v_m", 0.0)),
            area_factor=float(sch.get("area_factor", 1.0)),
        )
        if "blockade_ratio" in sch:
            if scheme.scheme is not Scheme.BLOCKADE:
                raise ConfigError("scheme.blockade_ratio only applies to the blockade scheme")
            blockade_ratio = float(sch["blockade_ratio"])
            if not blockade_ratio > 0:
                raise ConfigError("scheme.blockade_ratio must be > 0")

    est = data.get("estimate", {})
    check_keys(est, _ESTIMATE_KEYS, "estimate")
    coherence = est.get("coherence_time_s")
    if coherence is not None:
        coherence = [float(x) for x in (coherence if isinstance(coherence, list) else [coherence])]
        if any(not x > 0 for x in coherence):
            raise ConfigError("estimate.coherence_time_s must be positive")

    gate = data.get("gate", {})
    check_keys(gate, _GATE_KEYS, "gate")
    cz_tol = float(gate.get("cz_tolerance", 1e-3))
    if not cz_tol > 0:
        raise ConfigError("gate.cz_tolerance must be > 0")

    scan = data.get("blockade_scan", {})
    check_keys(scan, _SCAN_KEYS, "blockade_scan")
    ratios = [float(x) for x in scan.get("ratios", [10.0, 30.0, 100.0, 300.0])]

    thermal = dict(data.get("thermal", {}))
    check_keys(thermal, _THERMAL_KEYS, "thermal")
    given = [k for k in ("sep_sigma_m", "sep_sigma_fraction", "temperature_K") if k in thermal]
    if len(given) > 1:
        raise ConfigError(f"thermal: give one of sep_sigma_m, sep_sigma_fraction, temperature_K (got {given})")
    if "temperature_K" in thermal and "trap_omega_rad_s" not in thermal:
        raise ConfigError("thermal: temperature_K needs trap_omega_rad_s")

    out = data.get("output", {})
    check_keys(out, _OUTPUT_KEYS, "output")
    fmt = out.get("format")
    if fmt is not None and fmt not in ("csv", "json"):
        raise ConfigError("output.format must be 'csv' or 'json'")

    return ScenarioConfig(
        system=system,
        scheme=scheme,
        propagation=propagation,
        blockade_ratio=blockade_ratio,
        coherence_times=coherence,
        cz_tolerance=cz_tol,
        scan_ratios=ratios,
        thermal=thermal,
        output_dir=out.get("dir"),
        output_format=fmt,
        seed=_seed(data.get("seed", 0)),
    )


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return parse_config(data)
