import csv
import io
import json

import pytest

from dipolegate.cli import CSV_HEADERS, main
from dipolegate.config import parse_config
from dipolegate.errors import ConfigError

DIRECT = {
    "molecule": "CO",
    "geometry": {"architecture": "lattice", "r_m": 1e-6, "theta_rad": 0.0},
    "scheme": {"name": "direct", "instantaneous_pulses": True},
    "estimate": {"coherence_time_s": 1.0},
}
BLOCKADE = {
    "molecule": {"preset": "RbCs", "dipoles_debye": {"e": 1.0}},
    "geometry": {"architecture": "lattice", "r_m": 1e-6},
    "scheme": {"name": "blockade", "pulse_rabi_rad_s": 6283.185307179586, "blockade_ratio": 100},
    "gate": {"cz_tolerance": 0.05},
    "blockade_scan": {"ratios": [10, 100]},
}


def run(tmp_path, capsys, config, *args):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(config))
    code = main([*args, "--config", str(path)])
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_estimate_csv(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, DIRECT, "estimate")
    assert code == 0
    table = rows(out)
    assert table[0] == CSV_HEADERS["estimate"]
    tau = float(table[1][1])
    assert tau == pytest.approx(7.36e-4, rel=1e-3)
    assert int(table[1][2]) == int(1.0 / tau)


def test_gate_json_and_files(tmp_path, capsys):
    out_dir = tmp_path / "out"
    code, out, err = run(tmp_path, capsys, DIRECT, "gate", "--format", "json", "--out", str(out_dir))
    assert code == 0
    doc = json.loads(out)
    assert doc["format_version"] == 1
    assert doc["cz_equivalent"] is True
    assert "cz_equivalent = True" in err
    assert json.loads((out_dir / "gate.json").read_text()) == doc
    assert rows((out_dir / "gate.csv").read_text())[0] == CSV_HEADERS["gate"]


def test_flags_before_subcommand(tmp_path, capsys):
    path = tmp_path / "s.json"
    path.write_text(json.dumps(DIRECT))
    assert main(["--config", str(path), "--format", "json", "estimate"]) == 0
    assert json.loads(capsys.readouterr().out)["command"] == "estimate"


def test_exit_code_config_error(tmp_path, capsys):
    bad = {**DIRECT, "geometri": {}}
    code, _, err = run(tmp_path, capsys, bad, "gate")
    assert code == 1
    assert "geometri" in err
    path = tmp_path / "broken.json"
    path.write_text("{")
    assert main(["gate", "--config", str(path)]) == 1
    assert main(["gate"]) == 1


def test_exit_code_physics_error(tmp_path, capsys):
    magic = {**DIRECT, "geometry": {"architecture": "lattice", "r_m": 1e-6, "theta_rad": 0.9553166181245093}}
    code, _, err = run(tmp_path, capsys, magic, "gate")
    assert code == 2
    assert "zero" in err


def test_exit_code_degenerate_gate(tmp_path, capsys):
    # under-rotated pulses: |11> returns with amplitude 1 - 2 sin^4(0.35 pi), about -0.26
    broken = {**DIRECT, "scheme": {"name": "direct", "instantaneous_pulses": True, "area_factor": 0.7}}
    code, _, _ = run(tmp_path, capsys, broken, "gate")
    assert code == 3


def test_blockade_gate_and_warning(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, BLOCKADE, "gate", "--format", "json")
    assert code == 0
    assert json.loads(out)["cz_equivalent"] is True
    weak = json.loads(json.dumps(BLOCKADE))
    weak["scheme"]["blockade_ratio"] = 1
    code, _, err = run(tmp_path, capsys, weak, "gate")
    assert code == 0
    assert "BlockadeRegimeWarning" in err


def test_blockade_scan(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, BLOCKADE, "blockade-scan")
    assert code == 0
    table = rows(out)
    assert table[0] == CSV_HEADERS["blockade-scan"]
    assert float(table[1][1]) > float(table[2][1])


def test_thermal_seed_reproducible(tmp_path, capsys):
    cfg = {**DIRECT, "thermal": {"sep_sigma_fraction": 0.01, "samples": 20000}, "seed": 9}
    first = run(tmp_path, capsys, cfg, "thermal")
    second = run(tmp_path, capsys, cfg, "thermal")
    assert first[0] == 0
    assert first[1] == second[1]
    assert rows(first[1])[0] == CSV_HEADERS["thermal"]
    other = run(tmp_path, capsys, cfg, "thermal", "--seed", "10")
    assert other[1] != first[1]
    assert rows(other[1])[1][-1] == "10"


def test_seed_range(tmp_path, capsys):
    with pytest.raises(SystemExit):
        main(["thermal", "--seed", "-1"])
    with pytest.raises(ConfigError):
        parse_config({**DIRECT, "seed": 2**64})


def test_presets(capsys):
    assert main(["presets"]) == 0
    assert "NaCl" in capsys.readouterr().out
    assert main(["presets", "--format", "json"]) == 0
    assert set(json.loads(capsys.readouterr().out)["presets"]) == {"CO", "LiCs", "NaCl", "RbCs"}


def test_config_variants():
    cfg = parse_config({**DIRECT, "estimate": {"coherence_time_s": [0.1, 1.0]}})
    assert cfg.coherence_times == [0.1, 1.0]
    with pytest.raises(ConfigError):
        parse_config({**DIRECT, "molecules": {"A": "CO", "B": "CO"}})
    with pytest.raises(ConfigError):
        parse_config({**DIRECT, "thermal": {"temperature_K": 1e-5}})
    with pytest.raises(ConfigError):
        parse_config({**DIRECT, "scheme": {"name": "direct", "instantaneous_pulses": True, "blockade_ratio": 3}})
    mixed = parse_config({"molecules": {"A": "CO", "B": "RbCs"}, "geometry": DIRECT["geometry"]})
    assert mixed.system.basis.dims == (3, 3)
    assert mixed.scheme is None
