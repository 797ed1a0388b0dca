import subprocess
import sys

import numpy as np
import pytest

from vmspod import integrator
from vmspod.cli import main

SMALL = ["--set", "n_div=8", "--set", "dT=0.05", "--set", "M=20", "--set", "r=12",
         "--set", "R=8", "--set", "alpha=1e-2", "--set", "dt=0.05", "--set", "R_set=2 4 8"]


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    snaps, basis = d / "snaps.bin", d / "basis.bin"
    assert main(["gen-snapshots", *SMALL, "--out", str(snaps)]) == 0
    assert main(["build-pod", *SMALL, "--snapshots", str(snaps), "--out", str(basis)]) == 0
    return d, snaps, basis


def read_csv(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def test_gen_snapshots_deterministic(files, tmp_path):
    _, snaps, _ = files
    again = tmp_path / "again.bin"
    assert main(["gen-snapshots", *SMALL, "--out", str(again)]) == 0
    assert again.read_bytes() == snaps.read_bytes()


def test_gen_snapshots_single_column(tmp_path):
    out = tmp_path / "one.bin"
    assert main(["gen-snapshots", "--set", "n_div=4", "--set", "M=0", "--out", str(out)]) == 0
    from vmspod.archive import read_snapshots
    assert read_snapshots(out).n_snapshots == 1


def test_build_pod_report_and_invariants(files, tmp_path, capsys):
    _, snaps, _ = files
    out = tmp_path / "b.bin"
    assert main(["build-pod", *SMALL, "--snapshots", str(snaps), "--out", str(out),
                 "--check-invariants"]) == 0
    text = capsys.readouterr().out
    assert "L2 truncation r=12: direct=" in text and "tail=" in text
    assert "H1 truncation identity" in text
    lam = [float(line.split(",")[1]) for line in text.splitlines()
           if line[:1].isdigit()]
    assert len(lam) >= 12 and np.all(np.diff(lam) <= 0)


def test_corrupt_archive_exit_code(files, tmp_path, capsys):
    _, snaps, _ = files
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"NOTMAGIC" + snaps.read_bytes()[8:])
    assert main(["build-pod", "--snapshots", str(bad), "--out", str(tmp_path / "x")]) == 4
    assert "bad.bin" in capsys.readouterr().err


def test_missing_file_exit_code(tmp_path):
    assert main(["build-pod", "--snapshots", str(tmp_path / "none.bin")]) == 4


@pytest.mark.parametrize("argv", [
    ["build-pod"],
    ["simulate", "--set", "R=200"],
    ["simulate", "--set", "nonsense"],
    ["simulate", "--set", "color=blue"],
])
def test_config_errors(argv, tmp_path):
    assert main(argv) == 2


def test_simulate_closure_equivalences(files, tmp_path):
    _, _, basis = files
    runs = {
        "gal": ["--set", "variant=GALERKIN"],
        "vms0": ["--set", "variant=VMS", "--set", "alpha=0"],
        "ml": ["--set", "variant=MIXING_LENGTH"],
        "vmsR0": ["--set", "variant=VMS", "--set", "R=0"],
    }
    out = {}
    for name, extra in runs.items():
        path = tmp_path / f"{name}.csv"
        assert main(["simulate", *SMALL, *extra, "--basis", str(basis), "--out", str(path)]) == 0
        out[name] = read_csv(path)
    assert out["gal"].shape == (21, 14)
    assert np.abs(out["gal"] - out["vms0"]).max() <= 1e-12
    assert np.abs(out["ml"] - out["vmsR0"]).max() <= 1e-12


def test_simulate_reports_and_checks(files, tmp_path, capsys):
    _, _, basis = files
    path = tmp_path / "t.csv"
    assert main(["simulate", *SMALL, "--basis", str(basis), "--out", str(path),
                 "--check-invariants"]) == 0
    text = capsys.readouterr().out
    assert "holds = True" in text and "D_R positive semidefinite" in text


def test_simulate_numerical_failure(files, tmp_path, monkeypatch):
    _, _, basis = files
    monkeypatch.setattr(integrator, "NEWTON_MAXIT", 0)
    assert main(["simulate", *SMALL, "--basis", str(basis), "--out", str(tmp_path / "t.csv")]) == 3


def test_sweeps(files, tmp_path):
    _, _, basis = files
    dt = ["--set", "dt_set=0.1 0.05 0.025"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["sweep-dt", *SMALL, *dt, "--basis", str(basis), "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "dt,error"
    assert "slope = " in (tmp_path / "a.csv.summary.txt").read_text()
    r = tmp_path / "r.csv"
    assert main(["sweep-R", *SMALL, "--set", "R_sweep_dt=0.05",
                 "--basis", str(basis), "--out", str(r)]) == 0
    assert read_csv(r).shape == (3, 3)


def test_single_point_sweeps_rejected(files, tmp_path):
    _, _, basis = files
    assert main(["sweep-dt", *SMALL, "--set", "dt_set=0.05", "--basis", str(basis),
                 "--out", str(tmp_path / "x.csv")]) == 2
    assert main(["sweep-R", *SMALL, "--set", "R_set=4", "--basis", str(basis),
                 "--out", str(tmp_path / "y.csv")]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "vmspod", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "sweep-dt" in res.stdout
    res = subprocess.run([sys.executable, "-m", "vmspod", "frobnicate"], capture_output=True)
    assert res.returncode == 2
