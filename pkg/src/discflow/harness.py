"""Experiment configs, named initial conditions and persisted runs.

Configs are flat ``key = value`` text with dotted keys, for example::

    basis.M_max = 8
    basis.K_max = 8
    initial.preset = zn_symmetric
    initial.n = 2
    initial.seed = 7
    time.dt = 1e-3
    time.T = 1
    outputs.directory = runs/z2

Relative output directories are resolved against the config file's folder.
"""
from __future__ import annotations

import configparser
import datetime as _dt
import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (SCHEMES, BlowUpError, Trajectory, diagnostics_csv, flow,
                       reduced_discrepancy, reduced_flow)
from .slices import UnstableChartError, canonicalize
from .spectral import (BasisTable, GradedField, build_basis, format_snapshot, inner_product,
                       mode_field, norm, random_field, zero_field)
from .symmetry import Subgroup, classify_isotropy

PRESETS = ("zero", "single_mode", "swirl", "zn_symmetric", "random")
REDUCE_TOL = 1e-6


class ConfigError(ValueError):
    """Invalid config; ``problems`` lists one message per offending field."""

    def __init__(self, problems: list[str]):
        super().__init__("invalid config:\n  " + "\n  ".join(problems))
        self.problems = problems


@dataclass
class ExperimentConfig:
    M_max: int = 8
    K_max: int = 8
    quad_order: int | None = None
    grade: float = 2.0
    preset: str = "random"
    modes: list = field(default_factory=list)
    n: int = 2
    seed: int = 0
    decay: float = 2.0
    energy: float | None = None
    dt: float = 1e-3
    T: float = 1.0
    scheme: str = "rk4"
    subgroup: str = "auto"
    reduce: bool = False
    directory: str = "run"
    snapshot_every: int = 0

    def echo(self) -> dict:
        return asdict(self)


_KEYS = {
    "basis.M_max": ("M_max", int), "basis.K_max": ("K_max", int),
    "basis.quad_order": ("quad_order", "auto_int"), "grade": ("grade", float),
    "initial.preset": ("preset", str), "initial.modes": ("modes", "modes"),
    "initial.n": ("n", int), "initial.seed": ("seed", int), "initial.decay": ("decay", float),
    "initial.energy": ("energy", "opt_float"), "time.dt": ("dt", float), "time.T": ("T", float),
    "time.scheme": ("scheme", str), "symmetry.subgroup": ("subgroup", str),
    "symmetry.reduce": ("reduce", "bool"), "outputs.directory": ("directory", str),
    "outputs.snapshot_every": ("snapshot_every", int),
}


def _parse_modes(text: str) -> list:
    """``m,k,re,im`` groups separated by ``;``."""
    out = []
    for chunk in filter(None, (c.strip() for c in text.split(";"))):
        parts = [p.strip() for p in chunk.split(",")]
        if len(parts) != 4:
            raise ValueError(f"mode {chunk!r} needs m,k,re,im")
        out.append((int(parts[0]), int(parts[1]), float(parts[2]), float(parts[3])))
    return out


def _convert(kind, raw: str, parser: configparser.ConfigParser):
    if kind == "auto_int":
        return None if raw.strip().lower() in ("", "auto") else int(raw)
    if kind == "opt_float":
        return None if raw.strip().lower() in ("", "none") else float(raw)
    if kind == "bool":
        return parser.BOOLEAN_STATES[raw.strip().lower()]
    if kind == "modes":
        return _parse_modes(raw)
    return kind(raw.strip())


def parse_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                       comment_prefixes=("#",), inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise ConfigError([f"syntax: {exc}"]) from exc
    cfg = ExperimentConfig()
    problems = []
    for key, raw in parser["config"].items():
        if key not in _KEYS:
            problems.append(f"{key}: unknown key")
            continue
        attr, kind = _KEYS[key]
        try:
            setattr(cfg, attr, _convert(kind, raw, parser))
        except (ValueError, KeyError) as exc:
            problems.append(f"{key}: cannot parse {raw!r} ({exc})")
    problems += validate(cfg)
    if problems:
        raise ConfigError(problems)
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([f"config file: {exc}"]) from exc
    cfg = parse_config(text)
    if not os.path.isabs(cfg.directory):
        cfg.directory = str(path.parent / cfg.directory)
    return cfg


def validate(cfg: ExperimentConfig) -> list[str]:
    p = []
    if cfg.M_max < 0:
        p.append("basis.M_max: must be >= 0")
    if cfg.K_max < 1:
        p.append("basis.K_max: must be >= 1")
    if cfg.quad_order is not None and cfg.quad_order < 1:
        p.append("basis.quad_order: must be positive or auto")
    if not cfg.grade >= 0:
        p.append("grade: must be >= 0")
    if cfg.preset not in PRESETS:
        p.append(f"initial.preset: {cfg.preset!r} not one of {', '.join(PRESETS)}")
    if cfg.preset == "single_mode" and not cfg.modes:
        p.append("initial.modes: single_mode needs at least one m,k,re,im entry")
    for m, k, _, _ in cfg.modes:
        if not (0 <= m <= cfg.M_max and 1 <= k <= cfg.K_max):
            p.append(f"initial.modes: mode ({m},{k}) outside the basis")
    if cfg.preset == "zn_symmetric" and cfg.n < 1:
        p.append("initial.n: must be >= 1")
    if cfg.energy is not None and not cfg.energy >= 0:
        p.append("initial.energy: must be >= 0")
    if not (cfg.dt > 0 and math.isfinite(cfg.dt)):
        p.append("time.dt: must be > 0")
    if not (cfg.T >= 0 and math.isfinite(cfg.T)):
        p.append("time.T: must be >= 0")
    if cfg.scheme not in SCHEMES:
        p.append(f"time.scheme: {cfg.scheme!r} not one of {', '.join(SCHEMES)}")
    if cfg.subgroup != "auto":
        try:
            Subgroup.parse(cfg.subgroup)
        except ValueError as exc:
            p.append(f"symmetry.subgroup: {exc}")
    if cfg.snapshot_every < 0:
        p.append("outputs.snapshot_every: must be >= 0")
    return p


def make_basis(cfg: ExperimentConfig) -> BasisTable:
    return build_basis(cfg.M_max, cfg.K_max, cfg.quad_order)


def initial_field(basis: BasisTable, cfg: ExperimentConfig) -> GradedField:
    rng = np.random.default_rng(cfg.seed)
    if cfg.preset == "zero":
        return zero_field(basis, cfg.grade)
    if cfg.preset == "single_mode":
        u = mode_field(basis, {(m, k): complex(re, im) for m, k, re, im in cfg.modes}, cfg.grade)
        return _rescale(basis, u, cfg.energy)
    if cfg.preset == "swirl":
        k = np.arange(1, basis.K_max + 1)
        u = mode_field(basis, {(0, int(j)): 1.0 / j**2 for j in k}, cfg.grade)
        return _rescale(basis, u, cfg.energy)
    energy = 0.5 if cfg.energy is None else cfg.energy
    if cfg.preset == "zn_symmetric":
        return random_field(basis, rng, cfg.decay, cfg.grade,
                            m_allowed=range(0, basis.M_max + 1, cfg.n), energy=energy)
    return random_field(basis, rng, cfg.decay, cfg.grade, energy=energy)


def _rescale(basis, u, energy):
    if energy is None:
        return u
    e = 0.5 * inner_product(basis, u, u)
    return u if e == 0 else u * math.sqrt(energy / e)


# ---------------------------------------------------------------------------
# persistence

def atomic_write(path, text: str) -> None:
    """Write ``text`` to a temp file in the same folder and rename it over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix="." + path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    config: dict
    version: str
    started: str
    finished: str
    status: str
    files: list
    message: str = ""
    reduction: dict | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def _write_states(out: Path, traj: Trajectory, every: int) -> list[str]:
    files = []
    last = len(traj.states) - 1
    for i, state in enumerate(traj.states):
        if i == last or (every and i % every == 0):
            name = f"snapshots/state_{i:06d}.txt"
            atomic_write(out / name, format_snapshot(state, [f"# t={float(traj.times[i])!r}"]))
            files.append(name)
    return files


def run_experiment(cfg: ExperimentConfig) -> RunManifest:
    """Run the flow (and both reduced flows if requested) and persist everything."""
    problems = validate(cfg)
    if problems:
        raise ConfigError(problems)
    started = _now()
    out = Path(cfg.directory)
    basis = make_basis(cfg)
    u0 = initial_field(basis, cfg)
    status, message = "ok", ""
    try:
        traj = flow(basis, u0, cfg.dt, cfg.T, cfg.scheme)
    except BlowUpError as exc:
        traj, status, message = exc.trajectory, "blowup", str(exc)
    files = ["diagnostics.csv"]
    atomic_write(out / "diagnostics.csv", diagnostics_csv(traj.diagnostics))
    files += _write_states(out, traj, cfg.snapshot_every)
    reduction = None
    if cfg.reduce and status == "ok":
        reduction, rfiles, rstatus, rmsg = _reduce(basis, u0, cfg, out)
        files += rfiles
        if rstatus != "ok":
            status, message = rstatus, rmsg
    manifest = RunManifest(cfg.echo(), __version__, started, _now(), status, files, message, reduction)
    atomic_write(out / "manifest.json", manifest.to_json())
    return manifest


def _reduce(basis, u0, cfg, out: Path):
    H = classify_isotropy(basis, u0) if cfg.subgroup == "auto" else Subgroup.parse(cfg.subgroup)
    if H.kind == "so2":
        return {"subgroup": str(H), "note": "rotation-invariant data; quotient is trivial"}, [], "ok", ""
    try:
        p0 = canonicalize(basis, u0, H)
    except UnstableChartError as exc:
        return {"subgroup": str(H)}, [], "chart_failure", str(exc)
    qa = reduced_flow(basis, p0, cfg.dt, cfg.T, "quotient", cfg.scheme)
    qb = reduced_flow(basis, p0, cfg.dt, cfg.T, "chart", cfg.scheme)
    disc = reduced_discrepancy(basis, qa, qb)
    lines = ["t,energy_quotient,energy_chart,discrepancy"]
    for i in range(min(len(qa.points), len(qb.points))):
        d = norm(basis, qa.points[i].rep - qb.points[i].rep)
        row = (qa.times[i], qa.energies[i], qb.energies[i], d)
        lines.append(",".join(repr(float(x)) for x in row))
    atomic_write(out / "reduced.csv", "\n".join(lines) + "\n")
    atomic_write(out / "reduced_final.txt", qa.points[-1].to_snapshot())
    status = "ok"
    msg = ""
    for q in (qa, qb):
        if q.status != "ok":
            status, msg = q.status, q.message
    info = {"subgroup": str(H), "discrepancy": disc, "quotient_status": qa.status,
            "chart_status": qb.status, "tolerance": REDUCE_TOL}
    return info, ["reduced.csv", "reduced_final.txt"], status, msg

