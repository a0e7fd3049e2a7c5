import json
import os

import numpy as np
import pytest

from discflow.harness import (ConfigError, ExperimentConfig, atomic_write, initial_field, load_config,
                              make_basis, parse_config, run_experiment)
from discflow.spectral import inner_product, parse_snapshot
from discflow.slices import ReducedPoint

BASE = """
basis.M_max = 4
basis.K_max = 4
time.dt = 1e-2
time.T = 0.1
"""


def write_cfg(tmp_path, extra, name="run.cfg"):
    p = tmp_path / name
    p.write_text(BASE + extra)
    return p


def read_rows(path):
    lines = path.read_text().splitlines()
    return lines[0].split(","), [[float(x) for x in ln.split(",")] for ln in lines[1:]]


def test_defaults_and_parse():
    cfg = parse_config("initial.preset = swirl\ninitial.energy = 0.2\nsymmetry.reduce = yes  # comment\n")
    assert cfg.preset == "swirl" and cfg.energy == 0.2 and cfg.reduce is True
    assert cfg.M_max == 8 and cfg.dt == 1e-3 and cfg.T == 1.0
    assert parse_config("basis.quad_order = auto").quad_order is None


def test_config_errors_are_listed_per_field():
    text = ("basis.K_max = 0\ntime.dt = -1\ninitial.preset = vortex\ntime.scheme = euler\n"
            "symmetry.subgroup = cyclic:1\nwhat = 3\ninitial.seed = x\n")
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    keys = sorted(p.split(":")[0] for p in info.value.problems)
    assert keys == sorted(["basis.K_max", "time.dt", "initial.preset", "time.scheme",
                           "symmetry.subgroup", "what", "initial.seed"])


def test_single_mode_needs_valid_modes():
    with pytest.raises(ConfigError, match="initial.modes"):
        parse_config("initial.preset = single_mode\n")
    with pytest.raises(ConfigError, match=r"\(9,1\)"):
        parse_config("initial.preset = single_mode\ninitial.modes = 9,1,1,0\n")
    cfg = parse_config("initial.preset = single_mode\ninitial.modes = 1,1,1,0; 2,3,0,0.5\n")
    assert cfg.modes == [(1, 1, 1.0, 0.0), (2, 3, 0.0, 0.5)]


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.cfg")


def test_relative_directory_follows_config(tmp_path):
    cfg = load_config(write_cfg(tmp_path, "outputs.directory = sub/out\n"))
    assert cfg.directory == str(tmp_path / "sub" / "out")


@pytest.mark.parametrize("preset", ["zero", "swirl", "zn_symmetric", "random"])
def test_presets(preset):
    cfg = ExperimentConfig(M_max=4, K_max=4, preset=preset, n=3)
    b = make_basis(cfg)
    u = initial_field(b, cfg)
    e = 0.5 * inner_product(b, u, u)
    if preset == "zero":
        assert e == 0
    elif preset == "swirl":
        assert np.all(u.coeffs[np.abs(b.m_values) > 0] == 0)
    else:
        assert e == pytest.approx(0.5, rel=1e-12)
    if preset == "zn_symmetric":
        live = {abs(int(m)) for m in b.m_values[np.any(u.coeffs != 0, axis=1)]}
        assert live <= {0, 3}


def test_run_is_deterministic(tmp_path):
    a = load_config(write_cfg(tmp_path, "initial.seed = 4\noutputs.directory = a\n"))
    b = load_config(write_cfg(tmp_path, "initial.seed = 4\noutputs.directory = b\n", "b.cfg"))
    run_experiment(a)
    run_experiment(b)
    assert (tmp_path / "a/diagnostics.csv").read_bytes() == (tmp_path / "b/diagnostics.csv").read_bytes()


def test_zero_run_has_zero_rows(tmp_path):
    cfg = load_config(write_cfg(tmp_path, "initial.preset = zero\n"))
    man = run_experiment(cfg)
    assert man.status == "ok"
    head, rows = read_rows(tmp_path / "run/diagnostics.csv")
    assert len(rows) == 11
    assert all(v == 0 for row in rows for v in row[1:])


def test_zn_run_keeps_symmetry_and_persists(tmp_path):
    cfg = load_config(write_cfg(tmp_path, "initial.preset = zn_symmetric\ninitial.n = 2\n"
                                          "outputs.snapshot_every = 5\n"))
    man = run_experiment(cfg)
    head, rows = read_rows(tmp_path / "run/diagnostics.csv")
    col = head.index("defect_n2")
    assert max(r[col] for r in rows) < 1e-10
    assert man.files == ["diagnostics.csv", "snapshots/state_000000.txt", "snapshots/state_000005.txt",
                         "snapshots/state_000010.txt"]
    u, extra = parse_snapshot((tmp_path / "run/snapshots/state_000010.txt").read_text())
    assert extra == ["# t=0.1"]
    meta = json.loads((tmp_path / "run/manifest.json").read_text())
    assert meta["status"] == "ok" and meta["config"]["n"] == 2 and meta["version"]
    assert not [f for f in os.listdir(tmp_path / "run") if f.endswith(".tmp")]


def test_reduce_run(tmp_path):
    cfg = load_config(write_cfg(tmp_path, "initial.preset = zn_symmetric\nsymmetry.reduce = true\n"))
    man = run_experiment(cfg)
    assert man.status == "ok"
    assert man.reduction["subgroup"] == "cyclic:2" and man.reduction["discrepancy"] < 1e-6
    p = ReducedPoint.from_snapshot((tmp_path / "run/reduced_final.txt").read_text())
    assert str(p.subgroup) == "cyclic:2"
    head, rows = read_rows(tmp_path / "run/reduced.csv")
    assert head == ["t", "energy_quotient", "energy_chart", "discrepancy"] and len(rows) == 11


def test_reduce_invariant_data_is_trivial(tmp_path):
    cfg = load_config(write_cfg(tmp_path, "initial.preset = swirl\nsymmetry.reduce = true\n"))
    man = run_experiment(cfg)
    assert man.status == "ok" and man.reduction["subgroup"] == "so2"


def test_blowup_status(tmp_path):
    p = tmp_path / "boom.cfg"
    p.write_text(BASE.replace("1e-2", "0.5").replace("0.1", "100") + "initial.energy = 1e8\n")
    cfg = load_config(p)
    with pytest.warns(UserWarning):
        man = run_experiment(cfg)
    assert man.status == "blowup" and "non-finite" in man.message
    head, rows = read_rows(tmp_path / "run/diagnostics.csv")
    assert rows and all(np.isfinite(rows[-1]))


def test_atomic_write_replaces(tmp_path):
    p = tmp_path / "x" / "f.txt"
    atomic_write(p, "one")
    atomic_write(p, "two")
    assert p.read_text() == "two" and os.listdir(p.parent) == ["f.txt"]
