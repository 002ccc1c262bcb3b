import csv
import os
import subprocess
import sys

import numpy as np
import pytest

from tcm.cli import EXIT_CHECKPOINT, EXIT_CONFIG, EXIT_OK, EXIT_USAGE, main
from tcm.io import read_series

SMALL = """[grid]
n = 16
[integrator]
T = {T}
sample_every = 0.01
dt = 2e-3
[output]
checkpoint = {ckpt}
"""


def write_cfg(tmp_path, name="c.ini", T=0.02, ckpt=""):
    path = tmp_path / name
    path.write_text(SMALL.format(T=T, ckpt=ckpt))
    return str(path)


def test_usage_error_prints_full_help(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate"])
    assert exc.value.code == EXIT_USAGE
    err = capsys.readouterr().err
    for flag in ("--config", "--resume", "--c0", "--samples", "--series", "--workers"):
        assert flag in err


def test_simulate_zero_horizon(tmp_path):
    cfg = write_cfg(tmp_path, T=0)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_OK
    rows = list(csv.reader(open(tmp_path / "o" / "series.csv")))
    assert len(rows) == 1 and rows[0][0] == "time"


def test_bad_config_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.ini"
    path.write_text("[model]\nalpha = 0.5\nbogus = 1\n")
    assert main(["simulate", "--config", str(path)]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "alpha" in err and "bogus" in err


def test_resume_matches_uninterrupted(tmp_path):
    full = write_cfg(tmp_path, "full.ini", T=0.04)
    half = write_cfg(tmp_path, "half.ini", T=0.02, ckpt="half.ckpt")
    assert main(["simulate", "--config", full, "--out", str(tmp_path / "a")]) == 0
    assert main(["simulate", "--config", half, "--out", str(tmp_path / "b")]) == 0
    ckpt = str(tmp_path / "b" / "half.ckpt")
    assert main(["simulate", "--config", full, "--resume", ckpt, "--out", str(tmp_path / "c")]) == 0
    a = read_series(tmp_path / "a" / "series.csv")
    b = read_series(tmp_path / "b" / "series.csv")
    c = read_series(tmp_path / "c" / "series.csv")
    for name, col in a.items():
        joined = np.concatenate([b[name], c[name]])
        assert joined.shape == col.shape
        scale = np.maximum(np.abs(col), 1e-300)
        assert np.all(np.abs(joined - col) <= 1e-12 * scale + 1e-300), name


def test_resume_bad_checkpoint(tmp_path):
    cfg = write_cfg(tmp_path)
    bad = tmp_path / "x.ckpt"
    bad.write_bytes(b"garbage")
    assert main(["simulate", "--config", cfg, "--resume", str(bad)]) == EXIT_CHECKPOINT


def test_sweep_two_rows(tmp_path):
    cfg = write_cfg(tmp_path)
    assert main(["sweep", "--config", cfg, "--c0", "1e-3,1e-2", "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(open(tmp_path / "sweep.csv")))
    assert len(rows) == 2
    assert [r["classification"] for r in rows] == ["decay", "decay"]


def test_inequalities_command(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    assert main(["inequalities", "--config", cfg, "--samples", "3", "--seed", "1", "--out", str(tmp_path)]) == 0
    rows = list(csv.reader(open(tmp_path / "ratios.csv")))
    assert rows[0] == ["instance", "samples", "max_ratio", "mean_ratio", "seed"]
    assert len(rows) == 6
    assert "1/2" in capsys.readouterr().out


def test_plotdata(tmp_path):
    cfg = write_cfg(tmp_path)
    main(["simulate", "--config", cfg, "--out", str(tmp_path)])
    assert main(["plotdata", "--series", str(tmp_path / "series.csv"), "--out", str(tmp_path / "p")]) == 0
    lines = open(tmp_path / "p" / "l2_u.dat").read().splitlines()
    assert lines[0].startswith("#") and len(lines) == 4
    assert len(os.listdir(tmp_path / "p")) == 18


def test_plotdata_rejects_other_files(tmp_path):
    f = tmp_path / "x.csv"
    f.write_text("a,b\n1,2\n")
    assert main(["plotdata", "--series", str(f), "--out", str(tmp_path / "p")]) == EXIT_CONFIG


def test_verify_default_config(tmp_path, capsys):
    path = tmp_path / "default.ini"
    path.write_text("")
    assert main(["verify", "--config", str(path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") == 5


def test_module_entry_point(tmp_path):
    cfg = write_cfg(tmp_path, T=0)
    proc = subprocess.run(
        [sys.executable, "-m", "tcm", "simulate", "--config", cfg, "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
