import subprocess
import sys

import pytest

from acdiff.cli import main


def test_cli_oracle_check_exit_zero(tmp_path, capsys):
    rc = main(["oracle-check", "--eps", "0.25", "--paths", "20000",
               "--out", str(tmp_path / "oc"), "--set", "check_max_z=3"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "[PASS]" in out
    assert (tmp_path / "oc" / "oracle_check.csv").exists()


def test_cli_threshold_miss_exit_two(tmp_path, capsys):
    # an impossible threshold turns success into exit code 2
    rc = main(["oracle-check", "--eps", "0.25", "--paths", "5000",
               "--out", str(tmp_path / "oc"),
               "--set", "check_max_z=1e-9"])
    assert rc == 2
    assert "[FAIL]" in capsys.readouterr().out


def test_cli_error_exit_one(tmp_path, capsys):
    rc = main(["oracle-check", "--eps", "5.0", "--out", str(tmp_path / "oc")])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_cli_config_file_and_overrides(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("eps = 0.5\nn_paths = 5000\nseed = 3\n")
    rc = main(["oracle-check", "--config", str(cfg), "--eps", "0.25,0.1",
               "--seed", "9", "--out", str(tmp_path / "oc")])
    assert rc == 0
    header = (tmp_path / "oc" / "oracle_check.csv").read_text().splitlines()[0]
    assert "seed=9" in header


def test_cli_no_correction_flag(tmp_path):
    rc = main(["converge-weak-pde", "--no-correction",
               "--eps", "0.25,0.125,0.0625",
               "--out", str(tmp_path / "wp"),
               "--set", "T=0.25", "--set", "modes=1",
               "--set", "fpk_n_x=64", "--set", "fpk_m_half=64",
               "--set", "fpk_dt_scale=0.03125",
               "--set", "ad_n=256", "--set", "ad_dt=0.015625"])
    assert rc == 0
    body = (tmp_path / "wp" / "errors.csv").read_text()
    assert ",naive," in body and ",corrected," not in body


def test_cli_entry_point_subprocess(tmp_path):
    # the installed console script runs end to end
    proc = subprocess.run(
        [sys.executable, "-m", "acdiff.cli", "oracle-check", "--eps", "0.25",
         "--paths", "2000", "--out", str(tmp_path / "oc")],
        capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0
    assert "wrote" in proc.stdout
