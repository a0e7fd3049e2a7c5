import json

import pytest

from discflow.cli import main
from discflow.harness import load_config, run_experiment

CFG = """
basis.M_max = 4
basis.K_max = 4
initial.preset = zn_symmetric
initial.n = 2
time.dt = 1e-2
time.T = 0.05
outputs.directory = out
"""


@pytest.fixture
def cfg(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text(CFG)
    return p


def test_simulate_ok(cfg, capsys):
    assert main(["simulate", str(cfg)]) == 0
    assert "status=ok" in capsys.readouterr().out
    assert (cfg.parent / "out/diagnostics.csv").exists()


def test_config_error_exit(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text("time.dt = 0\nbasis.M_max = -2\n")
    assert main(["simulate", str(p)]) == 2
    err = capsys.readouterr().err
    assert "time.dt" in err and "basis.M_max" in err
    assert main(["reduce", str(tmp_path / "missing.cfg")]) == 2


def test_blowup_exit(tmp_path):
    p = tmp_path / "boom.cfg"
    p.write_text(CFG.replace("1e-2", "0.5").replace("0.05", "100") + "initial.energy = 1e8\n")
    with pytest.warns(UserWarning):
        assert main(["simulate", str(p)]) == 3


def test_reduce_ok(cfg, capsys):
    assert main(["reduce", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert "subgroup=cyclic:2" in out and "tol=1e-06" in out


def test_check_clean_and_corrupted(cfg, capsys):
    assert main(["check", "basis", "--config", str(cfg)]) == 0
    capsys.readouterr()
    assert main(["check", "basis", "--config", str(cfg), "--corrupt-zero", "2,3", "--json"]) == 1
    report = json.loads(capsys.readouterr().out)
    failed = [r for r in report["results"] if not r["passed"]]
    assert failed and all([2, 3] in r["offenders"] for r in failed if r["offenders"])
    assert main(["check", "basis", "--corrupt-zero", "9,9"]) == 2


def test_check_rejects_unknown_selector(capsys):
    with pytest.raises(SystemExit) as info:
        main(["check", "everything"])
    assert info.value.code == 2


def test_spectrum(cfg, capsys):
    run_experiment(load_config(cfg))
    snap = sorted((cfg.parent / "out/snapshots").iterdir())[-1]
    assert main(["spectrum", str(snap)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "m k energy" and len(lines) == 2 + 5 * 4
    odd = [float(ln.split()[2]) for ln in lines[1:-1] if int(ln.split()[0]) % 2]
    assert max(odd) < 1e-25
    bad = cfg.parent / "bad.txt"
    bad.write_text("garbage\n")
    assert main(["spectrum", str(bad)]) == 2
