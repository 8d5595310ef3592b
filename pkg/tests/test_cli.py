"""Configuration round-trips, persistence determinism, snapshot checksums, and
the command-line surface (exit codes, output schemas)."""

import json
from pathlib import Path

import numpy as np
import pytest

from vpblab.cli import EXIT_CONFIG, EXIT_OK, main
from vpblab.config import ConfigError, RunConfig, parse_config, serialize_config
from vpblab.output import read_csv, save_snapshot, load_snapshot, write_csv


def test_config_roundtrip():
    cfg = RunConfig(epsilon=0.25, eps_list=(0.2, 0.1), modes=5, degree=7,
                    dt=5e-4, t_final=1.5, nodes=7, seed=99, out_dir="x",
                    profile="full")
    text = serialize_config(cfg)
    back = parse_config(text)
    assert back == cfg
    assert parse_config(serialize_config(back)) == back


def test_config_errors_name_field():
    with pytest.raises(ConfigError, match="epsilon"):
        parse_config("epsilon = 0")
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config("nope = 1")
    with pytest.raises(ConfigError, match="degree"):
        RunConfig(degree=2).validate()


def test_config_comments_and_blanks():
    cfg = parse_config("# a comment\n\nepsilon = 0.5  # trailing\nmodes = 3\n")
    assert cfg.epsilon == 0.5 and cfg.modes == 3


def test_csv_roundtrip_and_determinism(tmp_path):
    rows = [(0.1, 1.0 / 3.0, 2), (0.2, np.pi, 3)]
    p1 = write_csv(tmp_path / "a.csv", ("x", "y", "k"), rows)
    p2 = write_csv(tmp_path / "b.csv", ("x", "y", "k"), rows)
    assert p1.read_bytes() == p2.read_bytes()
    header, back = read_csv(p1)
    assert header == ("x", "y", "k")
    assert back[1][1] == np.pi


def test_csv_row_width_guard(tmp_path):
    with pytest.raises(ValueError):
        write_csv(tmp_path / "bad.csv", ("a", "b"), [(1.0,)])


def test_snapshot_roundtrip_and_checksum(tmp_path, basis4):
    from vpblab.modes import ModeSet
    ms = ModeSet(1, 2)
    rng = np.random.default_rng(0)
    ghat = rng.standard_normal((ms.count, basis4.size)) * (1 + 1j)
    save_snapshot(tmp_path, "snap", ghat, 0.25, {"seed": 1}, ms)
    back, t, man = load_snapshot(tmp_path, "snap")
    assert t == 0.25
    assert np.array_equal(back, ghat)
    # tamper -> checksum failure
    p = tmp_path / "snap.csv"
    p.write_text(p.read_text().replace("0", "1", 1))
    with pytest.raises(IOError):
        load_snapshot(tmp_path, "snap")


def _write_cfg(tmp_path, name="run.cfg", **kw):
    base = dict(epsilon=0.5, modes=2, degree=4, dt=2e-3, t_final=0.1,
                nodes=5, seed=7, out_dir=str(tmp_path / "out"), amplitude=0.02)
    base.update(kw)
    cfg = RunConfig(**base)
    path = tmp_path / name
    path.write_text(serialize_config(cfg))
    return path


def test_cli_simulate_smoke(tmp_path):
    cfg = _write_cfg(tmp_path)
    assert main(["simulate", "--config", str(cfg)]) == EXIT_OK
    out = tmp_path / "out"
    man = json.loads((out / "simulate_manifest.json").read_text())
    assert "conservation" in man["outputs"]
    header, rows = read_csv(out / "conservation.csv")
    assert header[0] == "epsilon"
    assert len(rows) >= 2


def test_cli_simulate_deterministic(tmp_path):
    cfg1 = _write_cfg(tmp_path, name="r1.cfg", out_dir=str(tmp_path / "o1"))
    cfg2 = _write_cfg(tmp_path, name="r2.cfg", out_dir=str(tmp_path / "o2"))
    assert main(["simulate", "--config", str(cfg1)]) == EXIT_OK
    assert main(["simulate", "--config", str(cfg2)]) == EXIT_OK
    a = (tmp_path / "o1" / "conservation.csv").read_bytes()
    b = (tmp_path / "o2" / "conservation.csv").read_bytes()
    assert a == b


def test_cli_invalid_epsilon_exit_2(tmp_path, capsys):
    assert main(["simulate", "--epsilon", "0", "--out-dir", str(tmp_path)]) == EXIT_CONFIG
    assert "epsilon" in capsys.readouterr().err


def test_cli_unreadable_config_exit_2(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "missing.cfg")]) == EXIT_CONFIG


def test_cli_spectrum_branches(tmp_path):
    cfg = _write_cfg(tmp_path, epsilon=1.0, degree=5)
    rc = main(["spectrum", "--config", str(cfg), "--smax", "0.5", "--spoints", "6"])
    assert rc == EXIT_OK
    header, rows = read_csv(tmp_path / "out" / "branches.csv")
    svals = sorted({r[1] for r in rows})
    for s in svals:
        assert sum(1 for r in rows if r[1] == s) == 5      # five branches at every s
    man = json.loads((tmp_path / "out" / "spectrum_manifest.json").read_text())
    assert man["r0"] > 0.0


def test_cli_energy_report(tmp_path):
    cfg = _write_cfg(tmp_path, degree=5, epsilon=1.0)
    rc = main(["energy-report", "--config", str(cfg), "--eps-list", "1.0,0.1"])
    assert rc == EXIT_OK
    out = tmp_path / "out"
    ledger = json.loads((out / "ledger.json").read_text())
    assert ledger["a2"] == pytest.approx(1.0, abs=1e-9)
    man = json.loads((out / "energy_manifest.json").read_text())
    assert all(v > 0 for v in man["rates"].values())


def test_cli_limit_sweep_micro(tmp_path):
    cfg = _write_cfg(tmp_path, degree=5, t_final=0.1)
    rc = main(["limit-sweep", "--config", str(cfg),
               "--eps-list", "0.5,0.4,0.3,0.25", "--T", "0.1"])
    assert rc == EXIT_OK
    header, rows = read_csv(tmp_path / "out" / "rates.csv")
    assert len(rows) == 4
    assert all(r[3] >= 0.0 for r in rows)


def test_cli_uq_micro(tmp_path):
    cfg = _write_cfg(tmp_path, degree=4, t_final=0.1)
    rc = main(["uq", "--config", str(cfg), "--nodes", "5"])
    assert rc == EXIT_OK
    header, rows = read_csv(tmp_path / "out" / "uq_norms.csv")
    assert header == ("epsilon", "time", "total", "l2z", "l2supz", "dz", "gradv")
    assert len(rows) >= 2


def test_cli_default_config_smoke(tmp_path):
    # `simulate --config default` completes on the smoke profile
    rc = main(["simulate", "--config", "default", "--out-dir", str(tmp_path / "d"),
               "--modes", "2", "--degree", "4", "--T", "0.05"])
    assert rc == EXIT_OK
    assert (tmp_path / "d" / "simulate_manifest.json").exists()


def test_cli_numerical_failure_exit_3(tmp_path, capsys):
    from vpblab.cli import EXIT_NUMERICS
    cfg = _write_cfg(tmp_path, name="blow.cfg", epsilon=1.0, modes=3, degree=6,
                     dt=1e-3, t_final=2.0, amplitude=1.0)
    assert main(["simulate", "--config", str(cfg)]) == EXIT_NUMERICS
    assert "numerical failure" in capsys.readouterr().err
