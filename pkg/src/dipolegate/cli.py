"""Command-line entry point.

    dipolegate estimate --config scenario.json
    dipolegate gate --config scenario.json --out results/ --format json
    dipolegate blockade-scan --config scenario.json
    dipolegate thermal --config scenario.json --seed 42
    dipolegate presets

Exit codes: 0 ok, 1 configuration error, 2 physics error (for example a
zero interaction rate or a violated level restriction), 3 degenerate gate.
Each command writes ``<command>.csv`` and ``<command>.json`` into ``--out``
when given and prints the table to stdout in ``--format``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .analysis import (
    cz_equivalent,
    blockade_scan,
    extract_gate,
    separation_sigma,
    thermal_phase_spread,
    thermal_sigma_from_temperature,
)
from .config import MAX_SEED, ScenarioConfig, load_config
from .errors import BlockadeRegimeWarning, ConfigError, DegenerateGate, PhysicsError
from .molecules import load_preset_data, preset_names
from .protocols import Scheme, build_schedule, interaction_rate
from .units import operations_budget, pi_phase_time

CSV_HEADERS = {
    "estimate": ["rate_rad_s", "tau_pi_s", "ops_budget"],
    "gate": ["phi00", "phi01", "phi10", "phi11", "chi", "leakage_max", "success_prob", "bell_fidelity"],
    "blockade-scan": ["ratio", "infidelity", "leakage"],
    "thermal": ["samples", "phase_mean", "phase_std", "relative_spread", "seed"],
}
FORMAT_VERSION = 1


def _fmt(value: Any) -> str:
    # repr gives the shortest string that round-trips
    if isinstance(value, float):
        return repr(value)
    return str(value)


def to_csv(command: str, rows: Sequence[dict[str, Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = CSV_HEADERS[command]
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row[key]) for key in header])
    return buf.getvalue()


def _json_default(obj: Any) -> Any:
    if hasattr(obj, "item"):  # numpy scalars
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def to_json(document: dict[str, Any]) -> str:
    return json.dumps(document, indent=2, default=_json_default, allow_nan=True) + "\n"


def _emit(args: argparse.Namespace, cfg: ScenarioConfig | None, command: str, rows, document) -> None:
    csv_text = to_csv(command, rows)
    json_text = to_json({"format_version": FORMAT_VERSION, "command": command, **document})
    out_dir = args.out or (cfg.output_dir if cfg else None)
    if out_dir:
        path = Path(out_dir)
        path.mkdir(parents=True, exist_ok=True)
        stem = command.replace("-", "_")
        (path / f"{stem}.csv").write_text(csv_text)
        (path / f"{stem}.json").write_text(json_text)
    fmt = args.format or (cfg.output_format if cfg else None) or "csv"
    sys.stdout.write(csv_text if fmt == "csv" else json_text)


def _load(args: argparse.Namespace) -> ScenarioConfig:
    if not args.config:
        raise ConfigError(f"{args.command} needs --config")
    try:
        cfg = load_config(args.config)
    except (TypeError, ValueError, KeyError) as exc:
        if isinstance(exc, (ConfigError, PhysicsError)):
            raise
        raise ConfigError(f"{args.config}: {exc}") from None
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


# --- commands ---------------------------------------------------------------

def cmd_estimate(args: argparse.Namespace) -> int:
    cfg = _load(args)
    params = cfg.scheme_params() if cfg.scheme else None
    if params is None:
        from .protocols import SchemeParams

        params = SchemeParams(Scheme.DIRECT, cfg.system, instantaneous_pulses=True)
    rate = interaction_rate(params)
    rho = params.rho_e_target if params.scheme is not Scheme.INVERTED else 1.0
    tau = pi_phase_time(rate, rho)
    coherence = cfg.coherence_times or [
        min(cfg.system.molecule_a.coherence_time, cfg.system.molecule_b.coherence_time)
    ]
    rows = [
        {"rate_rad_s": rate, "tau_pi_s": tau, "ops_budget": operations_budget(t, tau), "coherence_time_s": t}
        for t in coherence
    ]
    _emit(args, cfg, "estimate", rows, {"scheme": params.scheme.value, "rows": rows})
    return 0


def cmd_gate(args: argparse.Namespace) -> int:
    cfg = _load(args)
    params = cfg.scheme_params()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BlockadeRegimeWarning)
        schedule = build_schedule(params)
    result = extract_gate(schedule, params.system, cfg.propagation)
    verdict = cz_equivalent(result, cfg.cz_tolerance)
    document = {
        "scheme": params.scheme.value,
        "result": result.to_dict(),
        "cz_equivalent": verdict,
        "cz_tolerance": cfg.cz_tolerance,
        "schedule": {k: v for k, v in schedule.metadata.items() if k != "warnings"},
    }
    _emit(args, cfg, "gate", [result.csv_row()], document)
    for msg in result.metadata.get("warnings", []):
        print(f"warning: {msg}", file=sys.stderr)
    print(f"chi = {result.entangling_phase_chi!r} rad; cz_equivalent = {verdict}", file=sys.stderr)
    return 0


def cmd_blockade_scan(args: argparse.Namespace) -> int:
    cfg = _load(args)
    params = cfg.scheme_params()
    if params.scheme is not Scheme.BLOCKADE:
        raise ConfigError("blockade-scan needs scheme.name = 'blockade'")
    scan = blockade_scan(params, cfg.scan_ratios, cfg.propagation)
    rows = [{"ratio": r.ratio, "infidelity": r.infidelity, "leakage": r.leakage} for r in scan.rows]
    _emit(args, cfg, "blockade-scan", rows, {"rows": rows})
    return 0


def cmd_thermal(args: argparse.Namespace) -> int:
    cfg = _load(args)
    params = cfg.scheme_params()
    th = cfg.thermal
    if "sep_sigma_m" in th:
        sigma = float(th["sep_sigma_m"])
    elif "sep_sigma_fraction" in th:
        sigma = float(th["sep_sigma_fraction"]) * params.system.geometry.r
    elif "temperature_K" in th:
        mass = params.system.molecule_a.mass
        sigma = separation_sigma(
            thermal_sigma_from_temperature(float(th["temperature_K"]), mass, float(th["trap_omega_rad_s"]))
        )
    else:
        raise ConfigError("thermal needs sep_sigma_m, sep_sigma_fraction or temperature_K")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BlockadeRegimeWarning)
        schedule = build_schedule(params)
    result = thermal_phase_spread(
        params.system,
        schedule,
        sigma,
        samples=int(th.get("samples", 100_000)),
        seed=cfg.seed,
        batch_size=int(th.get("batch_size", 65536)),
        workers=int(th.get("workers", 1)),
    )
    row = result.csv_row()
    _emit(args, cfg, "thermal", [row], {"result": row, "sep_sigma_m": sigma})
    return 0


def cmd_presets(args: argparse.Namespace) -> int:
    names = preset_names()
    if (args.format or "csv") == "json":
        sys.stdout.write(to_json({"presets": {n: load_preset_data(n) for n in names}}))
    else:
        for name in names:
            data = load_preset_data(name)
            print(f"{name}\t{data['name']}\t{', '.join(lv['label'] for lv in data['levels'])}")
    return 0


def _seed_arg(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= value <= MAX_SEED:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    # suppressed defaults let the flags go before or after the subcommand
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="scenario JSON file")
    common.add_argument("--seed", type=_seed_arg, help="override the scenario seed (u64)")
    common.add_argument("--out", help="directory for <command>.csv and <command>.json")
    common.add_argument("--format", choices=("csv", "json"), help="stdout format (default csv)")

    parser = argparse.ArgumentParser(prog="dipolegate", description=__doc__.split("\n\n")[0], parents=[common])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, help_text in [
        ("estimate", cmd_estimate, "interaction rate, pi-phase time and operations budget"),
        ("gate", cmd_gate, "simulate a scheme and extract its gate"),
        ("blockade-scan", cmd_blockade_scan, "blockade infidelity against V/Omega"),
        ("thermal", cmd_thermal, "Monte Carlo phase spread from separation jitter"),
        ("presets", cmd_presets, "list the bundled molecule presets"),
    ]:
        p = sub.add_parser(name, help=help_text, parents=[common])
        p.set_defaults(func=func)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for key in ("config", "seed", "out", "format"):
        if not hasattr(args, key):
            setattr(args, key, None)
    try:
        return args.func(args)
    except DegenerateGate as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except PhysicsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
