"""Command-line interface tests: exit codes, artifacts, reproducibility."""

import json

import pytest

from bdnklab.cli import main
from bdnklab.config import load_config
from bdnklab.errors import ConfigError

BASE_CONFIG = """\
model:
  kind: constant
grid:
  dimension: 1
  points: 32
  length: 6.283185307179586
initial_data:
  profile: {profile}
  eps0: 1.0{amplitude}
solver:
  order: 4
  cfl: 0.25
  t_end: 0.25
  output_every: 5
audit:
  samples: 25
  seed: 7
  directions: 3
output_dir: {outdir}
"""


def _write(tmp_path, profile="equilibrium", extra=""):
    out = tmp_path / "out"
    cfg = tmp_path / "run.yaml"
    amp = "" if profile == "equilibrium" else "\n  amplitude: 1.0e-3"
    cfg.write_text(BASE_CONFIG.format(profile=profile, outdir=out,
                                      amplitude=amp) + extra)
    return cfg, out


def test_config_loading_and_defaults(tmp_path):
    cfg_path, _ = _write(tmp_path)
    cfg = load_config(cfg_path)
    assert cfg.solver["order"] == 4
    assert cfg.audit["tolerance"] == 1e-6     # default filled in
    assert len(cfg.sha256) == 64


def test_config_rejects_unknown_keys(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("model: {kind: constant}\nturbo: true\n")
    with pytest.raises(ConfigError):
        load_config(p)


def test_config_rejects_bad_values(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("model: {kind: constant}\ngrid: {dimension: 7}\n")
    with pytest.raises(ConfigError) as err:
        load_config(p)
    assert "grid/dimension" in str(err.value)


def test_missing_config_exits_1(tmp_path, capsys):
    assert main(["evolve", "--config", str(tmp_path / "nope.yaml")]) == 1
    assert "config error" in capsys.readouterr().err


def test_causality_check_verdict_and_hash(tmp_path, capsys):
    cfg_path, out = _write(tmp_path)
    assert main(["causality-check", "--config", str(cfg_path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["all_pass"] is True
    assert report["seed"] == 7
    assert report["config_sha256"] == load_config(cfg_path).sha256
    b = report["reports"][0]["betas"]
    assert b["beta2"] == pytest.approx(0.5)
    assert b["beta_plus"] == pytest.approx(0.9197089985, abs=1e-3)
    assert b["beta_minus"] == pytest.approx(0.0036243348, abs=1e-3)
    assert (out / "causality_check.json").exists()


def test_causality_check_flags_failing_condition(tmp_path, capsys):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("model:\n  kind: constant\n  chi4: 0.5\n")
    assert main(["causality-check", "--config", str(cfg)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["all_pass"] is False
    assert report["reports"][0]["conditions"]["bulk_vs_shear"] is False
    assert report["reports"][0]["verdict"] is False


def test_char_speeds_csv(tmp_path, capsys):
    cfg_path, out = _write(tmp_path)
    assert main(["char-speeds", "--config", str(cfg_path)]) == 0
    text = capsys.readouterr().out
    lines = text.splitlines()
    assert lines[0].startswith("# config_sha256=")
    assert lines[1].split(",")[:3] == ["index", "beta_name", "beta"]
    # 4 beta branches x 3 directions
    assert len(lines) == 2 + 12
    for line in lines[2:]:
        cells = line.split(",")
        lm, lp = float(cells[-2]), float(cells[-1])
        assert abs(lm) <= 1.0 + 1e-12 and abs(lp) <= 1.0 + 1e-12
    assert (out / "char_speeds.csv").read_text() == text


def test_symbol_audit_passes_and_is_reproducible(tmp_path, capsys):
    cfg_path, out = _write(tmp_path)
    assert main(["symbol-audit", "--config", str(cfg_path), "--threads", "1"]) == 0
    first = capsys.readouterr().out
    report = json.loads(first)
    assert report["pass"] is True
    assert report["max_rel_err_first_order"] <= 1e-6
    assert report["max_rel_err_second_order"] <= 1e-6
    # byte-identical rerun even with a different thread count
    assert main(["symbol-audit", "--config", str(cfg_path), "--threads", "3"]) == 0
    assert capsys.readouterr().out == first


def test_seed_flag_overrides_config(tmp_path, capsys):
    cfg_path, _ = _write(tmp_path)
    main(["symbol-audit", "--config", str(cfg_path), "--seed", "11"])
    report = json.loads(capsys.readouterr().out)
    assert report["seed"] == 11


def test_evolve_equilibrium_artifacts(tmp_path, capsys):
    cfg_path, out = _write(tmp_path)
    assert main(["evolve", "--config", str(cfg_path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["stop_reason"] == "t_end"
    assert report["final_monitors"]["div_residual_l2"] <= 1e-12
    assert report["final_monitors"]["constraint4a_l2"] <= 1e-12
    mon = (out / "monitors.csv").read_text().splitlines()
    assert mon[0] == ("time,max_norm_violation,div_residual_l2,"
                      "constraint4a_l2,min_eps,cfl")
    assert (out / "snapshot_000000.bin").exists()
    assert (out / "run_report.json").exists()


def test_evolve_reruns_byte_identical(tmp_path, capsys):
    cfg_path, out = _write(tmp_path, profile="sinusoid")
    assert main(["evolve", "--config", str(cfg_path)]) == 0
    capsys.readouterr()
    mon1 = (out / "monitors.csv").read_bytes()
    snap1 = (out / "snapshot_000005.bin").read_bytes()
    assert main(["evolve", "--config", str(cfg_path)]) == 0
    assert (out / "monitors.csv").read_bytes() == mon1
    assert (out / "snapshot_000005.bin").read_bytes() == snap1


def test_evolve_numerical_failure_exits_2(tmp_path, capsys):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("model:\n  kind: constant\n  chi4: 0.5\n"
                   "solver: {t_end: 0.1}\n")
    assert main(["evolve", "--config", str(cfg)]) == 2
    assert "numerical failure" in capsys.readouterr().err
